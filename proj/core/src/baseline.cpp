#include "ipixmatch/baseline.hpp"

#include <cmath>
#include <string>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/numerics.hpp"
#include "ipixmatch/pseudo.hpp"

namespace ipix::baseline {

double warmup_alpha(std::int64_t i_c, const WarmupSchedule& schedule) {
  if (schedule.warmup_iters < 1) {
    throw InvalidParameterError("warmup_alpha: warmup_iters must be >= 1");
  }
  if (i_c < 0) {
    throw InvalidParameterError("warmup_alpha: i_c must be >= 0");
  }
  const std::int64_t clamped = std::min(i_c, schedule.warmup_iters);
  const double frac =
      static_cast<double>(clamped) / static_cast<double>(schedule.warmup_iters);
  return schedule.alpha_max * std::exp(-5.0 * (1.0 - frac) * (1.0 - frac));
}

CrossEntropyResult supervised_loss(const Tensor& logits,
                                   const std::vector<std::uint8_t>& labels,
                                   std::uint8_t ignore_id) {
  if (logits.shape.size() != 3) {
    throw ShapeError("supervised_loss: expected C x H x W logits");
  }
  const std::size_t c = logits.shape[0];
  const std::size_t hw = logits.shape[1] * logits.shape[2];
  if (labels.size() != hw) {
    throw ShapeError("supervised_loss: label map size mismatch");
  }
  for (std::uint8_t id : labels) {
    if (id != ignore_id && id >= c) {
      throw InvalidInputError("supervised_loss: label id " + std::to_string(id) +
                              " out of range for C=" + std::to_string(c));
    }
  }
  require_finite(logits, "supervised_loss");

  CrossEntropyResult res;
  res.grad_logits = Tensor::zeros(logits.shape);
  std::size_t count = 0;
  for (std::size_t j = 0; j < hw; ++j) {
    if (labels[j] != ignore_id) ++count;
  }
  if (count == 0) {
    res.empty = true;
    return res;
  }
  const Tensor probs = numerics::softmax_over_classes(logits);
  double loss = 0.0;
  for (std::size_t j = 0; j < hw; ++j) {
    if (labels[j] == ignore_id) continue;
    const std::size_t y = labels[j];
    loss -= std::log(probs.data[y * hw + j]);
    for (std::size_t k = 0; k < c; ++k) {
      const double onehot = (k == y) ? 1.0 : 0.0;
      res.grad_logits.data[k * hw + j] =
          (probs.data[k * hw + j] - onehot) / static_cast<double>(count);
    }
  }
  res.loss = loss / static_cast<double>(count);
  res.contributing = count;
  return res;
}

FixmatchResult fixmatch_unsup_loss(const Tensor& teacher_logits_weak,
                                   const Tensor& student_logits_strong,
                                   double tau) {
  if (!teacher_logits_weak.same_shape(student_logits_strong)) {
    throw ShapeError("fixmatch_unsup_loss: teacher/student shape mismatch");
  }
  const std::size_t c = teacher_logits_weak.shape[0];
  const std::size_t hw = teacher_logits_weak.shape[1] * teacher_logits_weak.shape[2];

  const pseudo::PseudoLabelMap hard = pseudo::hard_pseudo_label(teacher_logits_weak);
  const pseudo::ConfidenceMask mask = pseudo::confidence_mask(teacher_logits_weak, tau);

  FixmatchResult res;
  res.grad_student = Tensor::zeros(student_logits_strong.shape);
  res.omega_size = mask.size();
  if (mask.size() == 0) return res;

  const Tensor probs = numerics::softmax_over_classes(student_logits_strong);
  const double inv = 1.0 / static_cast<double>(mask.size());
  double loss = 0.0;
  for (std::size_t j : mask.pixel_indices) {
    const std::size_t y = hard.labels[j];
    loss -= std::log(probs.data[y * hw + j]);
    for (std::size_t k = 0; k < c; ++k) {
      const double onehot = (k == y) ? 1.0 : 0.0;
      res.grad_student.data[k * hw + j] = (probs.data[k * hw + j] - onehot) * inv;
    }
  }
  res.loss = loss * inv;
  return res;
}

LossReport total_loss(double l_sup, double l_unsup, double l_ipix,
                      std::int64_t i_c, const WarmupSchedule& schedule,
                      bool warmup_enabled, double omega_fraction) {
  if (!std::isfinite(l_sup) || !std::isfinite(l_unsup) || !std::isfinite(l_ipix)) {
    throw InvalidInputError("total_loss: non-finite loss component");
  }
  LossReport report;
  report.l_sup = l_sup;
  report.l_unsup = l_unsup;
  report.l_ipix = l_ipix;
  report.alpha = warmup_enabled ? warmup_alpha(i_c, schedule) : schedule.alpha_max;
  report.l_sum = l_sup + l_unsup + report.alpha * l_ipix;
  report.omega_fraction = omega_fraction;
  return report;
}

}  // namespace ipix::baseline
