#include "ipixmatch/pseudo.hpp"

#include <string>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/numerics.hpp"

namespace ipix::pseudo {

namespace {

void check_logit_map(const Tensor& logits, const char* what) {
  if (logits.shape.size() != 3) {
    throw ShapeError(std::string(what) + ": expected C x H x W logit map");
  }
  if (logits.shape[0] < 2) {
    throw ShapeError(std::string(what) + ": need at least 2 classes");
  }
  require_finite(logits, what);
}

}  // namespace

PseudoLabelMap hard_pseudo_label(const Tensor& logits) {
  check_logit_map(logits, "hard_pseudo_label");
  const std::size_t c = logits.shape[0];
  const std::size_t hw = logits.shape[1] * logits.shape[2];
  PseudoLabelMap out;
  out.height = logits.shape[1];
  out.width = logits.shape[2];
  out.labels.resize(hw);
  for (std::size_t j = 0; j < hw; ++j) {
    std::size_t best = 0;
    double best_val = logits.data[j];
    for (std::size_t k = 1; k < c; ++k) {
      const double v = logits.data[k * hw + j];
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    out.labels[j] = static_cast<std::uint8_t>(best);
  }
  return out;
}

ConfidenceMask confidence_mask(const Tensor& logits, double tau) {
  check_logit_map(logits, "confidence_mask");
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidParameterError("confidence_mask: tau must be in [0,1], got " +
                                std::to_string(tau));
  }
  const Tensor probs = numerics::softmax_over_classes(logits);
  const std::size_t c = logits.shape[0];
  const std::size_t hw = logits.shape[1] * logits.shape[2];
  ConfidenceMask mask;
  mask.tau = tau;
  for (std::size_t j = 0; j < hw; ++j) {
    double mx = probs.data[j];
    for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, probs.data[k * hw + j]);
    if (mx > tau) mask.pixel_indices.push_back(j);
  }
  return mask;
}

}  // namespace ipix::pseudo
