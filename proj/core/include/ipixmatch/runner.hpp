#pragma once

#include <filesystem>

#include "ipixmatch/config.hpp"
#include "ipixmatch/metrics.hpp"

namespace ipix::harness {

struct RunResult {
  Metrics final_metrics;
  std::filesystem::path run_dir;
  std::int64_t iterations = 0;
};

// Executes the configured training run. Writes into out_dir:
//   config.txt     — canonical config echo
//   metrics.csv    — one row per step (see header line)
//   checkpoint.json/.f64 — refreshed at every evaluation point
//   final_metrics.json
// The evaluation set is the unlabeled split, scored against the held-out
// ground truth.
RunResult run_training(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ipix::harness
