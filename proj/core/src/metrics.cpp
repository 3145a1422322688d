#include "ipixmatch/metrics.hpp"

#include "ipixmatch/errors.hpp"
#include "ipixmatch/pseudo.hpp"

namespace ipix::harness {

namespace {

struct Confusion {
  std::vector<std::size_t> tp, fp, fn;

  explicit Confusion(std::size_t c) : tp(c, 0), fp(c, 0), fn(c, 0) {}

  void add(const model::ModelParams& params, const Tensor& image,
           const std::vector<std::uint8_t>& truth) {
    const Tensor logits = model::forward(params, image);
    const pseudo::PseudoLabelMap pred = pseudo::hard_pseudo_label(logits);
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const std::size_t p = pred.labels[j];
      const std::size_t t = truth[j];
      if (p == t) {
        ++tp[p];
      } else {
        ++fp[p];
        ++fn[t];
      }
    }
  }

  Metrics finish() const {
    Metrics m;
    m.per_class_iou.resize(tp.size(), -1.0);
    m.included.resize(tp.size(), false);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < tp.size(); ++c) {
      const std::size_t denom = tp[c] + fp[c] + fn[c];
      if (denom == 0) continue;  // absent from prediction and truth
      m.per_class_iou[c] = static_cast<double>(tp[c]) / static_cast<double>(denom);
      m.included[c] = true;
      sum += m.per_class_iou[c];
      ++n;
    }
    m.miou = n > 0 ? sum / static_cast<double>(n) : 0.0;
    return m;
  }
};

}  // namespace

Metrics evaluate(const model::ModelParams& params,
                 std::span<const data::Sample> samples_with_truth) {
  if (samples_with_truth.empty()) {
    throw InvalidInputError("evaluate: empty evaluation set");
  }
  Confusion conf(params.num_classes());
  for (const data::Sample& s : samples_with_truth) {
    conf.add(params, s.image, s.label);
  }
  return conf.finish();
}

Metrics evaluate_dataset(const model::ModelParams& params,
                         const data::Dataset& dataset,
                         std::span<const std::size_t> indices) {
  if (indices.empty()) {
    throw InvalidInputError("evaluate_dataset: empty evaluation set");
  }
  Confusion conf(params.num_classes());
  for (std::size_t i : indices) {
    conf.add(params, dataset.samples[i].image, dataset.eval_labels[i]);
  }
  return conf.finish();
}

}  // namespace ipix::harness
