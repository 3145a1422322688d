#pragma once

#include <cstdint>
#include <filesystem>

#include "ipixmatch/model.hpp"

namespace ipix::harness {

struct Checkpoint {
  model::ModelParams student;
  model::ModelParams teacher;
  std::int64_t iteration = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Writes <path> (JSON metadata: architecture dims, iteration, seed, config
// hash) and <path stem>.f64 (little-endian doubles; student then teacher,
// per layer: weights then bias).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& meta_path);

Checkpoint load_checkpoint(const std::filesystem::path& meta_path);

}  // namespace ipix::harness
