#include "ipixmatch/augment.hpp"

#include <algorithm>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/rng.hpp"

namespace ipix::augment {

namespace {

// flip, then translate; out(y, x) = in(clamp(y - dy), clamp(x' - dx)) where
// x' accounts for the flip. Edge replication via clamping keeps values valid.
template <typename T>
void move_plane(const T* in, T* out, std::size_t h, std::size_t w,
                const Geometry& g) {
  const std::ptrdiff_t hh = static_cast<std::ptrdiff_t>(h);
  const std::ptrdiff_t ww = static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t y = 0; y < hh; ++y) {
    const std::ptrdiff_t sy = std::clamp<std::ptrdiff_t>(y - g.dy, 0, hh - 1);
    for (std::ptrdiff_t x = 0; x < ww; ++x) {
      std::ptrdiff_t sx = std::clamp<std::ptrdiff_t>(x - g.dx, 0, ww - 1);
      if (g.flip) sx = ww - 1 - sx;
      out[y * ww + x] = in[sy * ww + sx];
    }
  }
}

}  // namespace

Tensor apply_geometry(const Tensor& image, const Geometry& geometry) {
  if (image.shape.size() != 3) {
    throw ShapeError("apply_geometry: expected C x H x W image");
  }
  const std::size_t h = image.shape[1];
  const std::size_t w = image.shape[2];
  Tensor out = Tensor::zeros(image.shape);
  for (std::size_t c = 0; c < image.shape[0]; ++c) {
    move_plane(image.data.data() + c * h * w, out.data.data() + c * h * w, h, w,
               geometry);
  }
  return out;
}

AugmentedPair weak_augment(const Tensor& image,
                           const std::vector<std::uint8_t>* label,
                           std::uint64_t seed) {
  if (image.shape.size() != 3) {
    throw ShapeError("weak_augment: expected C x H x W image");
  }
  Rng rng(hash_seed(seed, 0x7765616bULL));
  AugmentedPair pair;
  pair.geometry.flip = rng.bernoulli(0.5);
  pair.geometry.dx = static_cast<int>(rng.uniform_int(-2, 2));
  pair.geometry.dy = static_cast<int>(rng.uniform_int(-2, 2));
  pair.weak_image = apply_geometry(image, pair.geometry);
  if (label != nullptr) {
    const std::size_t h = image.shape[1];
    const std::size_t w = image.shape[2];
    if (label->size() != h * w) {
      throw ShapeError("weak_augment: label map size mismatch");
    }
    pair.label.resize(h * w);
    move_plane(label->data(), pair.label.data(), h, w, pair.geometry);
    pair.has_label = true;
  }
  return pair;
}

Tensor strong_augment(const Tensor& weak_view, std::uint64_t seed) {
  if (weak_view.shape.size() != 3) {
    throw ShapeError("strong_augment: expected C x H x W image");
  }
  Rng rng(hash_seed(seed, 0x7374726f6e67ULL));
  const std::size_t channels = weak_view.shape[0];
  const std::size_t h = weak_view.shape[1];
  const std::size_t w = weak_view.shape[2];
  Tensor out = weak_view;
  for (std::size_t c = 0; c < channels; ++c) {
    const double scale = rng.uniform(0.7, 1.3);
    const double shift = rng.uniform(-0.15, 0.15);
    double* plane = out.data.data() + c * h * w;
    for (std::size_t i = 0; i < h * w; ++i) {
      plane[i] = std::clamp(plane[i] * scale + shift, 0.0, 1.0);
    }
  }
  // one cutout rectangle, up to 40% of each side, filled with 0.5
  const std::size_t cut_h = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(0.4 * static_cast<double>(h))));
  const std::size_t cut_w = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(0.4 * static_cast<double>(w))));
  const std::size_t y0 = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(h - cut_h)));
  const std::size_t x0 = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(w - cut_w)));
  for (std::size_t c = 0; c < channels; ++c) {
    double* plane = out.data.data() + c * h * w;
    for (std::size_t y = y0; y < y0 + cut_h; ++y) {
      for (std::size_t x = x0; x < x0 + cut_w; ++x) plane[y * w + x] = 0.5;
    }
  }
  return out;
}

}  // namespace ipix::augment
