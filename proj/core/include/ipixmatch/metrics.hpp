#pragma once

#include <span>
#include <vector>

#include "ipixmatch/dataset.hpp"
#include "ipixmatch/model.hpp"

namespace ipix::harness {

struct Metrics {
  std::vector<double> per_class_iou;  // -1 for classes absent everywhere
  std::vector<bool> included;         // entered the mean
  double miou = 0.0;
};

// Argmax predictions (no augmentation) against ground truth, IoU accumulated
// over the whole set. Classes absent from both prediction and truth are
// excluded from the mean.
Metrics evaluate(const model::ModelParams& params,
                 std::span<const data::Sample> samples_with_truth);

// Evaluates on the given sample indices using the dataset's held-out ground
// truth.
Metrics evaluate_dataset(const model::ModelParams& params,
                         const data::Dataset& dataset,
                         std::span<const std::size_t> indices);

}  // namespace ipix::harness
