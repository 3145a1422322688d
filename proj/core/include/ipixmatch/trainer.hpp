#pragma once

#include <cstdint>
#include <span>

#include "ipixmatch/baseline.hpp"
#include "ipixmatch/dataset.hpp"
#include "ipixmatch/ipixloss.hpp"
#include "ipixmatch/model.hpp"

namespace ipix::trainer {

enum class Method { SUP_ONLY, BASELINE_LO, IPIX_KL, IPIX_CR };

struct TrainStepConfig {
  Method method = Method::IPIX_KL;
  double lr = 0.02;
  double momentum = 0.9;
  double ema_m = 0.99;
  double tau = 0.8;
  double temperature = 4.0;
  double alpha_max = 1.0;
  bool warmup_enabled = true;
  std::int64_t warmup_iters = 1;
  std::size_t threads = 1;  // batch-level parallelism; never changes results
};

// Student/teacher weights plus optimizer and iteration state. Owned by one
// logical thread at a time.
struct TrainerState {
  model::ModelParams student;
  model::ModelParams teacher;
  model::GradientBundle velocity;
  std::int64_t iteration = 0;
  std::uint64_t run_seed = 12345;
};

// Teacher starts as an exact copy of the student.
TrainerState make_trainer(std::uint64_t seed, std::size_t hidden_channels,
                          std::size_t num_classes);

// One optimization step: augment, teacher pseudo-labeling on weak views,
// student losses on strong views, backprop, SGD, EMA, iteration += 1.
baseline::LossReport train_step(TrainerState& state,
                                std::span<const data::Sample> labeled,
                                std::span<const data::Sample> unlabeled,
                                const TrainStepConfig& cfg);

}  // namespace ipix::trainer
