#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ipixmatch/trainer.hpp"

namespace ipix::harness {

// Training run configuration; parsed from `key = value` text.
struct RunConfig {
  std::string dataset;  // dataset directory
  trainer::Method method = trainer::Method::IPIX_KL;
  std::uint64_t seed = 12345;
  std::int64_t epochs = 40;
  std::size_t batch_labeled = 16;
  std::size_t batch_unlabeled = 8;
  double lr = 0.02;
  double momentum = 0.9;
  double ema_m = 0.99;
  double tau = 0.8;
  double temperature = 4.0;
  double alpha_max = 1.0;
  bool warmup_enabled = true;
  std::int64_t warmup_epochs = 5;
  std::int64_t eval_every = 10;  // epochs
  std::size_t hidden_channels = 8;
  std::size_t threads = 1;
};

// Dataset generation configuration.
struct GenConfig {
  std::size_t num_classes = 4;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t count = 512;
  std::uint64_t seed = 12345;
  double noise_sigma = 0.05;
  double labeled_fraction = 1.0 / 16.0;  // or explicit labeled_count
  std::size_t labeled_count = 0;         // 0 derives from the fraction
  std::uint64_t split_seed = 0;          // 0 reuses seed
};

std::string method_name(trainer::Method m);
trainer::Method parse_method(const std::string& name);

// `key = value` per line, '#' comments; unknown keys are hard errors.
RunConfig parse_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_text(const std::string& text);
GenConfig parse_gen_config(const std::filesystem::path& path);
GenConfig parse_gen_config_text(const std::string& text);

// Canonical serialization (sorted keys); basis of the config hash.
std::string canonical_text(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace ipix::harness
