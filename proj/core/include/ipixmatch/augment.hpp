#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ipixmatch/tensor.hpp"

namespace ipix::augment {

// Geometric transform shared by the weak and strong views of one sample.
struct Geometry {
  bool flip = false;  // horizontal
  int dx = 0;         // translation, edge-replicated
  int dy = 0;
};

struct AugmentedPair {
  Tensor weak_image;
  Tensor strong_image;  // empty until strong_augment runs
  Geometry geometry;
  std::vector<std::uint8_t> label;  // transformed with the same geometry
  bool has_label = false;
};

// Applies `geometry` (flip, then translate with edge replication) to a
// 3 x H x W image. Pixel values pass through unchanged.
Tensor apply_geometry(const Tensor& image, const Geometry& geometry);

// Random flip (p = 0.5) and integer translation in [-2, 2]^2, identical
// geometry applied to the optional label map via nearest assignment.
AugmentedPair weak_augment(const Tensor& image,
                           const std::vector<std::uint8_t>* label,
                           std::uint64_t seed);

// Photometric divergence only: per-channel affine jitter (scale [0.7, 1.3],
// shift [-0.15, 0.15]), clamp to [0, 1], one cutout rectangle (up to 40% of
// each side) filled with 0.5. Geometry is untouched.
Tensor strong_augment(const Tensor& weak_view, std::uint64_t seed);

}  // namespace ipix::augment
