#pragma once

#include <cstdint>
#include <vector>

#include "ipixmatch/tensor.hpp"

namespace ipix::baseline {

// Label id marking an unlabeled pixel / sample.
inline constexpr std::uint8_t kUnlabeledId = 255;

// Gaussian ramp for the inter-pixel loss weight.
struct WarmupSchedule {
  std::int64_t warmup_iters = 1;  // i_w >= 1
  double alpha_max = 1.0;
};

// Per-step loss components; l_sum = l_sup + l_unsup + alpha * l_ipix.
struct LossReport {
  double l_sup = 0.0;
  double l_unsup = 0.0;
  double l_ipix = 0.0;
  double alpha = 0.0;
  double l_sum = 0.0;
  double omega_fraction = 0.0;
};

// alpha_max * exp(-5 * (1 - min(i_c, i_w)/i_w)^2); constant after i_w.
double warmup_alpha(std::int64_t i_c, const WarmupSchedule& schedule);

struct CrossEntropyResult {
  double loss = 0.0;
  Tensor grad_logits;            // same shape as logits
  std::size_t contributing = 0;  // pixels that entered the mean
  bool empty = false;            // every pixel ignored
};

// Mean pixel-wise cross-entropy of a C x H x W logit map against H*W class
// ids, skipping `ignore_id` pixels. Gradient is (softmax - onehot)/count.
CrossEntropyResult supervised_loss(const Tensor& logits,
                                   const std::vector<std::uint8_t>& labels,
                                   std::uint8_t ignore_id = kUnlabeledId);

struct FixmatchResult {
  double loss = 0.0;
  Tensor grad_student;  // zero off-Omega
  std::size_t omega_size = 0;
};

// FixMatch-style unsupervised term: hard pseudo-labels and confidence mask
// from the teacher's weak-view logits, cross-entropy of the student's
// strong-view logits averaged over the masked pixels.
FixmatchResult fixmatch_unsup_loss(const Tensor& teacher_logits_weak,
                                   const Tensor& student_logits_strong,
                                   double tau);

// L_sum = L_o + alpha * L_IPix with alpha from the warmup ramp (or pinned at
// alpha_max when warmup is disabled).
LossReport total_loss(double l_sup, double l_unsup, double l_ipix,
                      std::int64_t i_c, const WarmupSchedule& schedule,
                      bool warmup_enabled, double omega_fraction = 0.0);

}  // namespace ipix::baseline
