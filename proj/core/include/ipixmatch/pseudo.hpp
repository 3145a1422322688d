#pragma once

#include <cstdint>
#include <vector>

#include "ipixmatch/tensor.hpp"

namespace ipix::pseudo {

// Hard pseudo-labels: per-pixel argmax class id.
struct PseudoLabelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> labels;  // H*W class ids, each < C
};

// The high-confidence pixel set Omega and the threshold it was cut at.
struct ConfidenceMask {
  std::vector<std::size_t> pixel_indices;  // strictly increasing flat indices
  double tau = 0.0;

  std::size_t size() const { return pixel_indices.size(); }
};

// Per-pixel argmax over the class axis of a C x H x W logit map.
// Ties break toward the lowest class index.
PseudoLabelMap hard_pseudo_label(const Tensor& logits);

// Pixels whose maximum class probability strictly exceeds tau.
ConfidenceMask confidence_mask(const Tensor& logits, double tau);

}  // namespace ipix::pseudo
