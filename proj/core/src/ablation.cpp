#include "ipixmatch/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/runner.hpp"

namespace ipix::harness {

AblationTable run_ablation(
    const std::vector<std::pair<std::string, RunConfig>>& configs,
    const std::vector<std::uint64_t>& seeds,
    const std::filesystem::path& out_dir) {
  if (configs.empty() || seeds.empty()) {
    throw InvalidParameterError("run_ablation: need at least one config and one seed");
  }
  AblationTable table;
  table.seeds = seeds;
  for (const auto& [name, base_cfg] : configs) {
    AblationRow row;
    row.name = name;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base_cfg;
      cfg.seed = seed;
      const std::filesystem::path run_dir =
          out_dir / name / ("seed_" + std::to_string(seed));
      try {
        const RunResult res = run_training(cfg, run_dir);
        row.per_seed_miou.push_back(res.final_metrics.miou);
      } catch (const Error&) {
        row.failed = true;
        break;
      }
    }
    if (!row.failed) {
      double mean = 0.0;
      for (double v : row.per_seed_miou) mean += v;
      mean /= static_cast<double>(row.per_seed_miou.size());
      double var = 0.0;
      for (double v : row.per_seed_miou) var += (v - mean) * (v - mean);
      var /= static_cast<double>(row.per_seed_miou.size());
      row.mean = mean;
      row.stddev = std::sqrt(var);
    }
    table.rows.push_back(std::move(row));
  }
  for (AblationRow& row : table.rows) {
    if (!row.failed && !table.rows.front().failed) {
      row.delta_vs_first = row.mean - table.rows.front().mean;
    }
  }
  return table;
}

std::string format_table(const AblationTable& table) {
  std::ostringstream out;
  out << "# Synthetic shapes benchmark (desk scale); values are NOT comparable\n"
         "# to any published PASCAL VOC / Cityscapes numbers.\n";
  out << "config";
  for (std::uint64_t s : table.seeds) out << "\tseed_" << s;
  out << "\tmean\tstddev\tdelta_vs_first\n";
  char buf[40];
  auto f = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  for (const AblationRow& row : table.rows) {
    out << row.name;
    if (row.failed) {
      out << "\tFAILED\n";
      continue;
    }
    for (double v : row.per_seed_miou) out << '\t' << f(v);
    out << '\t' << f(row.mean) << '\t' << f(row.stddev) << '\t'
        << f(row.delta_vs_first) << '\n';
  }
  return out.str();
}

void write_table(const AblationTable& table, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream txt(out_dir / "table.txt");
    if (!txt) throw IoError("cannot write table.txt");
    txt << format_table(table);
  }
  std::ofstream csv(out_dir / "table.csv");
  if (!csv) throw IoError("cannot write table.csv");
  csv << "config";
  for (std::uint64_t s : table.seeds) csv << ",seed_" << s;
  csv << ",mean,stddev,delta_vs_first,failed\n";
  char buf[80];
  for (const AblationRow& row : table.rows) {
    csv << row.name;
    for (std::size_t i = 0; i < table.seeds.size(); ++i) {
      if (i < row.per_seed_miou.size()) {
        std::snprintf(buf, sizeof(buf), "%.9g", row.per_seed_miou[i]);
        csv << ',' << buf;
      } else {
        csv << ',';
      }
    }
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g", row.mean, row.stddev,
                  row.delta_vs_first);
    csv << ',' << buf << ',' << (row.failed ? "1" : "0") << '\n';
  }
}

}  // namespace ipix::harness
