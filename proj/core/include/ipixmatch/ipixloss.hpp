#pragma once

#include <cstddef>

#include "ipixmatch/tensor.hpp"

namespace ipix::ipixloss {

// Distribution distance used per channel.
enum class RelationMetric { KL, CR };

struct IPixConfig {
  RelationMetric metric = RelationMetric::KL;
  double temperature = 4.0;
  double tau = 0.8;
};

struct IPixResult {
  double value = 0.0;
  Tensor grad_q;                       // dense C x H x W, zero off-Omega
  std::size_t omega_size = 0;
  bool skipped = false;                // |Omega| <= 1
  std::size_t degenerate_channels = 0; // CR channels with a constant vector
};

// Inter-pixel relation loss between teacher logits p and student logits q:
// confidence mask from p, per-channel temperature softmax over the masked
// pixels, distribution distance summed over channels, normalized by
// C * ln|Omega|. Gradient flows to q only.
IPixResult interpixel_loss(const Tensor& p, const Tensor& q, const IPixConfig& cfg);

// Straight-line loop transcription of the same quantity, value only.
// Shares no code with interpixel_loss; used as its oracle.
double interpixel_loss_reference(const Tensor& p, const Tensor& q,
                                 const IPixConfig& cfg);

}  // namespace ipix::ipixloss
