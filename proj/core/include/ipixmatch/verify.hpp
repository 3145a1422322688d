#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ipix::harness {

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  // Test hook: add `corruption` to the analytic gradient of this model layer
  // before the finite-difference comparison; -1 disables.
  int corrupt_layer = -1;
  double corruption = 1e-3;
};

// Runs every registered property suite (finite differences, oracle
// equivalences, EMA recurrence, warmup formula, mask monotonicity, loss
// structure) on fixed internal seeds.
std::vector<CheckResult> verify(const VerifyOptions& options = {});

// Number of rows verify() always produces.
std::size_t check_inventory_size();

std::string format_check_report(const std::vector<CheckResult>& results);
void write_check_report_json(const std::vector<CheckResult>& results,
                             const std::filesystem::path& path);

}  // namespace ipix::harness
