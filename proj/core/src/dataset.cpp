#include "ipixmatch/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ipixmatch/baseline.hpp"
#include "ipixmatch/errors.hpp"
#include "ipixmatch/rng.hpp"

namespace ipix::data {

namespace {

constexpr std::uint64_t kSampleStream = 0x73616d706c65ULL;
constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;

void check_spec(const DatasetSpec& spec) {
  if (spec.num_classes < 2) {
    throw InvalidParameterError("dataset: need at least 2 classes");
  }
  if (spec.num_classes > 200) {
    throw InvalidParameterError("dataset: too many classes for u8 labels");
  }
  if (spec.height < 16 || spec.width < 16) {
    throw InvalidParameterError("dataset: H and W must be >= 16");
  }
  if (spec.count < 1) {
    throw InvalidParameterError("dataset: count must be >= 1");
  }
  if (!(spec.noise_sigma >= 0.0)) {
    throw InvalidParameterError("dataset: noise_sigma must be >= 0");
  }
  if (spec.min_shapes > spec.max_shapes) {
    throw InvalidParameterError("dataset: min_shapes > max_shapes");
  }
}

enum class ShapeKind { Rectangle, Disc, Diamond };

}  // namespace

void class_color(std::size_t c, double rgb[3]) {
  // signature offsets around the 0.5 gray background; amplitude keeps the
  // task color-separable but noise-limited
  static const int kSigns[][3] = {
      {+1, -1, -1}, {-1, +1, -1}, {-1, -1, +1}, {+1, +1, -1},
      {+1, -1, +1}, {-1, +1, +1}, {+1, +1, +1}, {-1, -1, -1},
  };
  const double amp = 0.16 + 0.02 * static_cast<double>((c - 1) / 8);
  const int* s = kSigns[(c - 1) % 8];
  for (int i = 0; i < 3; ++i) rgb[i] = 0.5 + amp * s[i];
}

Sample generate_sample(const DatasetSpec& spec, std::size_t index) {
  check_spec(spec);
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  Rng rng(hash_seed(spec.seed, index, kSampleStream));

  Sample sample;
  sample.image = Tensor::zeros({3, h, w});
  for (std::size_t i = 0; i < 3 * h * w; ++i) sample.image.data[i] = 0.5;
  sample.label.assign(h * w, 0);

  const std::size_t n_shapes =
      spec.max_shapes == 0
          ? 0
          : static_cast<std::size_t>(
                rng.uniform_int(static_cast<std::int64_t>(spec.min_shapes),
                                static_cast<std::int64_t>(spec.max_shapes)));
  for (std::size_t s = 0; s < n_shapes; ++s) {
    const ShapeKind kind = static_cast<ShapeKind>(rng.uniform_int(0, 2));
    const std::size_t cls = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<std::int64_t>(spec.num_classes) - 1));
    const double size = rng.uniform(6.0, static_cast<double>(h) / 2.0);
    const double cy = rng.uniform(0.0, static_cast<double>(h));
    const double cx = rng.uniform(0.0, static_cast<double>(w));
    double rgb[3];
    class_color(cls, rgb);
    const double half = size / 2.0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double ddy = static_cast<double>(y) + 0.5 - cy;
        const double ddx = static_cast<double>(x) + 0.5 - cx;
        bool inside = false;
        switch (kind) {
          case ShapeKind::Rectangle:
            inside = std::abs(ddy) <= half && std::abs(ddx) <= half;
            break;
          case ShapeKind::Disc:
            inside = ddy * ddy + ddx * ddx <= half * half;
            break;
          case ShapeKind::Diamond:
            inside = std::abs(ddy) + std::abs(ddx) <= half;
            break;
        }
        if (!inside) continue;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          sample.image.data[ch * h * w + y * w + x] = rgb[ch];
        }
        sample.label[y * w + x] = static_cast<std::uint8_t>(cls);
      }
    }
  }

  if (spec.noise_sigma > 0.0) {
    for (double& v : sample.image.data) {
      v = std::clamp(v + rng.normal(0.0, spec.noise_sigma), 0.0, 1.0);
    }
  }
  return sample;
}

std::vector<Sample> generate_dataset(const DatasetSpec& spec) {
  check_spec(spec);
  std::vector<Sample> samples;
  samples.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    samples.push_back(generate_sample(spec, i));
  }
  return samples;
}

Dataset split_labeled(const DatasetSpec& spec, std::vector<Sample> samples,
                      std::size_t labeled_count, std::uint64_t split_seed) {
  if (labeled_count < 1 || labeled_count > samples.size()) {
    throw InvalidParameterError("split_labeled: labeled count out of range");
  }
  Dataset ds;
  ds.manifest.version = 1;
  ds.manifest.num_classes = spec.num_classes;
  ds.manifest.height = spec.height;
  ds.manifest.width = spec.width;
  ds.manifest.count = samples.size();
  ds.manifest.seed = spec.seed;
  ds.manifest.noise_sigma = spec.noise_sigma;

  // partial Fisher-Yates over the index vector
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(hash_seed(split_seed, kSplitStream));
  for (std::size_t i = 0; i < labeled_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                                  0, static_cast<std::int64_t>(idx.size() - 1 - i)));
    std::swap(idx[i], idx[j]);
  }
  ds.manifest.labeled_indices.assign(idx.begin(),
                                     idx.begin() + static_cast<std::ptrdiff_t>(labeled_count));
  std::sort(ds.manifest.labeled_indices.begin(), ds.manifest.labeled_indices.end());

  ds.eval_labels.reserve(samples.size());
  for (const Sample& s : samples) ds.eval_labels.push_back(s.label);

  std::vector<bool> labeled(samples.size(), false);
  for (std::size_t i : ds.manifest.labeled_indices) labeled[i] = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!labeled[i]) {
      std::fill(samples[i].label.begin(), samples[i].label.end(),
                baseline::kUnlabeledId);
    }
  }
  ds.samples = std::move(samples);
  return ds;
}

namespace {

void write_file(const std::filesystem::path& path, const void* data,
                std::size_t bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<char> read_file(const std::filesystem::path& path,
                            std::size_t expected_bytes) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open: " + path.string());
  const std::size_t actual = static_cast<std::size_t>(in.tellg());
  if (actual != expected_bytes) {
    throw IntegrityError(path.string() + ": expected " +
                         std::to_string(expected_bytes) + " bytes, found " +
                         std::to_string(actual) + " (corruption at byte offset " +
                         std::to_string(std::min(actual, expected_bytes)) + ")");
  }
  in.seekg(0);
  std::vector<char> buf(actual);
  in.read(buf.data(), static_cast<std::streamsize>(actual));
  if (!in) throw IoError("read failed: " + path.string());
  return buf;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const DatasetManifest& m = dataset.manifest;

  nlohmann::json j;
  j["version"] = m.version;
  j["C"] = m.num_classes;
  j["H"] = m.height;
  j["W"] = m.width;
  j["count"] = m.count;
  j["seed"] = m.seed;
  j["noise_sigma"] = m.noise_sigma;
  j["labeled_indices"] = m.labeled_indices;
  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw IoError("cannot write manifest.json in " + dir.string());
  mf << j.dump(2) << "\n";

  const std::size_t hw = m.height * m.width;
  std::vector<float> images(m.count * 3 * hw);
  std::vector<std::uint8_t> labels(m.count * hw);
  std::vector<std::uint8_t> eval_labels(m.count * hw);
  for (std::size_t i = 0; i < m.count; ++i) {
    const Sample& s = dataset.samples[i];
    for (std::size_t k = 0; k < 3 * hw; ++k) {
      images[i * 3 * hw + k] = static_cast<float>(s.image.data[k]);
    }
    std::copy(s.label.begin(), s.label.end(), labels.begin() + static_cast<std::ptrdiff_t>(i * hw));
    std::copy(dataset.eval_labels[i].begin(), dataset.eval_labels[i].end(),
              eval_labels.begin() + static_cast<std::ptrdiff_t>(i * hw));
  }
  write_file(dir / "images.f32", images.data(), images.size() * sizeof(float));
  write_file(dir / "labels.u8", labels.data(), labels.size());
  write_file(dir / "labels_eval.u8", eval_labels.data(), eval_labels.size());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw IoError("cannot open manifest.json in " + dir.string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("manifest.json: " + std::string(e.what()));
  }

  Dataset ds;
  DatasetManifest& m = ds.manifest;
  try {
    m.version = j.at("version").get<int>();
    if (m.version != 1) {
      throw VersionError("manifest version " + std::to_string(m.version) +
                         " not supported (expected 1)");
    }
    m.num_classes = j.at("C").get<std::size_t>();
    m.height = j.at("H").get<std::size_t>();
    m.width = j.at("W").get<std::size_t>();
    m.count = j.at("count").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.noise_sigma = j.at("noise_sigma").get<double>();
    m.labeled_indices = j.at("labeled_indices").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("manifest.json: " + std::string(e.what()));
  }
  for (std::size_t i = 0; i < m.labeled_indices.size(); ++i) {
    if (m.labeled_indices[i] >= m.count ||
        (i > 0 && m.labeled_indices[i] <= m.labeled_indices[i - 1])) {
      throw IntegrityError("manifest.json: labeled_indices not sorted/unique/in range");
    }
  }

  const std::size_t hw = m.height * m.width;
  const std::vector<char> images =
      read_file(dir / "images.f32", m.count * 3 * hw * sizeof(float));
  const std::vector<char> labels = read_file(dir / "labels.u8", m.count * hw);
  const std::vector<char> eval_labels =
      read_file(dir / "labels_eval.u8", m.count * hw);

  const float* img = reinterpret_cast<const float*>(images.data());
  ds.samples.resize(m.count);
  ds.eval_labels.resize(m.count);
  for (std::size_t i = 0; i < m.count; ++i) {
    Sample& s = ds.samples[i];
    s.image = Tensor::zeros({3, m.height, m.width});
    for (std::size_t k = 0; k < 3 * hw; ++k) {
      const double v = static_cast<double>(img[i * 3 * hw + k]);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw IntegrityError("images.f32: value out of [0,1] at byte offset " +
                             std::to_string((i * 3 * hw + k) * sizeof(float)));
      }
      s.image.data[k] = v;
    }
    s.label.resize(hw);
    ds.eval_labels[i].resize(hw);
    for (std::size_t k = 0; k < hw; ++k) {
      const std::uint8_t id = static_cast<std::uint8_t>(labels[i * hw + k]);
      const std::uint8_t gt = static_cast<std::uint8_t>(eval_labels[i * hw + k]);
      if (id >= m.num_classes && id != baseline::kUnlabeledId) {
        throw IntegrityError("labels.u8: bad class id at byte offset " +
                             std::to_string(i * hw + k));
      }
      if (gt >= m.num_classes) {
        throw IntegrityError("labels_eval.u8: bad class id at byte offset " +
                             std::to_string(i * hw + k));
      }
      s.label[k] = id;
      ds.eval_labels[i][k] = gt;
    }
  }
  return ds;
}

}  // namespace ipix::data
