#include "ipixmatch/checkpoint.hpp"

#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipixmatch/errors.hpp"

namespace ipix::harness {

namespace {

std::filesystem::path blob_path(const std::filesystem::path& meta_path) {
  std::filesystem::path p = meta_path;
  p.replace_extension(".f64");
  return p;
}

void append_params(const model::ModelParams& params, std::vector<double>& out) {
  for (const model::ConvLayer& l : params.layers) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
}

std::size_t param_count(const model::ModelParams& params) {
  std::size_t n = 0;
  for (const model::ConvLayer& l : params.layers) {
    n += l.weights.size() + l.bias.size();
  }
  return n;
}

void read_params(const double*& cursor, model::ModelParams& params) {
  for (model::ConvLayer& l : params.layers) {
    std::copy(cursor, cursor + l.weights.size(), l.weights.begin());
    cursor += l.weights.size();
    std::copy(cursor, cursor + l.bias.size(), l.bias.begin());
    cursor += l.bias.size();
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& meta_path) {
  nlohmann::json j;
  j["version"] = 1;
  j["hidden_channels"] = ckpt.student.hidden_channels();
  j["num_classes"] = ckpt.student.num_classes();
  j["iteration"] = ckpt.iteration;
  j["seed"] = ckpt.seed;
  j["config_hash"] = ckpt.config_hash;

  std::vector<double> blob;
  blob.reserve(2 * param_count(ckpt.student));
  append_params(ckpt.student, blob);
  append_params(ckpt.teacher, blob);

  std::ofstream mf(meta_path);
  if (!mf) throw IoError("cannot write checkpoint metadata: " + meta_path.string());
  mf << j.dump(2) << "\n";

  std::ofstream bf(blob_path(meta_path), std::ios::binary);
  if (!bf) throw IoError("cannot write checkpoint blob: " + blob_path(meta_path).string());
  bf.write(reinterpret_cast<const char*>(blob.data()),
           static_cast<std::streamsize>(blob.size() * sizeof(double)));
  if (!bf) throw IoError("checkpoint blob write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& meta_path) {
  std::ifstream mf(meta_path);
  if (!mf) throw IoError("cannot open checkpoint metadata: " + meta_path.string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("checkpoint metadata: " + std::string(e.what()));
  }
  Checkpoint ckpt;
  try {
    if (j.at("version").get<int>() != 1) {
      throw VersionError("checkpoint version not supported");
    }
    const std::size_t hidden = j.at("hidden_channels").get<std::size_t>();
    const std::size_t classes = j.at("num_classes").get<std::size_t>();
    ckpt.iteration = j.at("iteration").get<std::int64_t>();
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.config_hash = j.at("config_hash").get<std::uint64_t>();
    ckpt.student = model::init_params(0, hidden, classes);
    ckpt.teacher = model::init_params(0, hidden, classes);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("checkpoint metadata: " + std::string(e.what()));
  }

  const std::size_t expected = 2 * param_count(ckpt.student);
  std::ifstream bf(blob_path(meta_path), std::ios::binary | std::ios::ate);
  if (!bf) throw IoError("cannot open checkpoint blob: " + blob_path(meta_path).string());
  const std::size_t actual = static_cast<std::size_t>(bf.tellg());
  if (actual != expected * sizeof(double)) {
    throw IntegrityError("checkpoint blob: expected " +
                         std::to_string(expected * sizeof(double)) +
                         " bytes, found " + std::to_string(actual) +
                         " (corruption at byte offset " +
                         std::to_string(std::min(actual, expected * sizeof(double))) + ")");
  }
  std::vector<double> blob(expected);
  bf.seekg(0);
  bf.read(reinterpret_cast<char*>(blob.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (!bf) throw IoError("checkpoint blob read failed");

  const double* cursor = blob.data();
  read_params(cursor, ckpt.student);
  read_params(cursor, ckpt.teacher);
  return ckpt;
}

}  // namespace ipix::harness
