#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ipixmatch/config.hpp"

namespace ipix::harness {

struct AblationRow {
  std::string name;
  std::vector<double> per_seed_miou;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double delta_vs_first = 0.0;
  bool failed = false;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  std::vector<std::uint64_t> seeds;
};

// Runs every (config, seed) pair under out_dir/<name>/seed_<s>/ and
// aggregates final mIoU per config. A failed run marks its row failed; the
// sweep continues.
AblationTable run_ablation(
    const std::vector<std::pair<std::string, RunConfig>>& configs,
    const std::vector<std::uint64_t>& seeds,
    const std::filesystem::path& out_dir);

std::string format_table(const AblationTable& table);

// table.csv + table.txt under out_dir.
void write_table(const AblationTable& table, const std::filesystem::path& out_dir);

}  // namespace ipix::harness
