#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipixmatch/ablation.hpp"
#include "ipixmatch/checkpoint.hpp"
#include "ipixmatch/config.hpp"
#include "ipixmatch/dataset.hpp"
#include "ipixmatch/errors.hpp"
#include "ipixmatch/metrics.hpp"
#include "ipixmatch/reports.hpp"
#include "ipixmatch/runner.hpp"
#include "ipixmatch/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < list.size()) {
    const std::size_t comma = list.find(',', pos);
    const std::string tok = list.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw ipix::ConfigError("--seeds: empty seed list");
  return seeds;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  const ipix::harness::GenConfig gen = ipix::harness::parse_gen_config(config_path);
  ipix::data::DatasetSpec spec;
  spec.num_classes = gen.num_classes;
  spec.height = gen.height;
  spec.width = gen.width;
  spec.count = gen.count;
  spec.seed = gen.seed;
  spec.noise_sigma = gen.noise_sigma;
  std::vector<ipix::data::Sample> samples = ipix::data::generate_dataset(spec);
  const ipix::data::Dataset dataset = ipix::data::split_labeled(
      spec, std::move(samples), gen.labeled_count, gen.split_seed);
  ipix::data::save_dataset(dataset, out_dir);
  std::cout << "wrote " << dataset.manifest.count << " samples ("
            << dataset.manifest.labeled_indices.size() << " labeled) to " << out_dir
            << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              int threads_override) {
  ipix::harness::RunConfig cfg = ipix::harness::parse_run_config(config_path);
  if (threads_override > 0) cfg.threads = static_cast<std::size_t>(threads_override);
  const ipix::harness::RunResult res = ipix::harness::run_training(cfg, out_dir);
  std::printf("final mIoU %.6f after %lld iterations (%s)\n", res.final_metrics.miou,
              static_cast<long long>(res.iterations),
              ipix::harness::method_name(cfg.method).c_str());
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_dir) {
  const ipix::harness::Checkpoint ckpt = ipix::harness::load_checkpoint(checkpoint_path);
  const ipix::data::Dataset dataset = ipix::data::load_dataset(data_dir);
  std::vector<std::size_t> all(dataset.manifest.count);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const ipix::harness::Metrics m =
      ipix::harness::evaluate_dataset(ckpt.student, dataset, all);
  for (std::size_t c = 0; c < m.per_class_iou.size(); ++c) {
    if (m.included[c]) {
      std::printf("class %zu IoU %.6f\n", c, m.per_class_iou[c]);
    } else {
      std::printf("class %zu absent\n", c);
    }
  }
  std::printf("mIoU %.6f\n", m.miou);
  return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& seeds,
               const std::string& out_dir, const std::string& methods,
               const std::string& warmups) {
  const ipix::harness::RunConfig base = ipix::harness::parse_run_config(config_path);
  std::vector<std::pair<std::string, ipix::harness::RunConfig>> configs;

  std::vector<ipix::trainer::Method> method_list;
  if (methods.empty()) {
    method_list.push_back(base.method);
  } else {
    std::size_t pos = 0;
    while (pos < methods.size()) {
      const std::size_t comma = methods.find(',', pos);
      const std::string tok =
          methods.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      method_list.push_back(ipix::harness::parse_method(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  std::vector<bool> warmup_list;
  if (warmups.empty()) {
    warmup_list.push_back(base.warmup_enabled);
  } else {
    for (char ch : warmups) {
      if (ch == '0') warmup_list.push_back(false);
      else if (ch == '1') warmup_list.push_back(true);
      else if (ch != ',') throw ipix::ConfigError("--warmup: expected 0/1 list");
    }
  }
  for (ipix::trainer::Method m : method_list) {
    for (bool wu : warmup_list) {
      ipix::harness::RunConfig cfg = base;
      cfg.method = m;
      cfg.warmup_enabled = wu;
      std::string name = ipix::harness::method_name(m);
      if (warmup_list.size() > 1) name += wu ? "_warmup" : "_nowarmup";
      configs.emplace_back(std::move(name), cfg);
    }
  }

  const ipix::harness::AblationTable table =
      ipix::harness::run_ablation(configs, parse_seed_list(seeds), out_dir);
  ipix::harness::write_table(table, out_dir);
  std::cout << ipix::harness::format_table(table);
  for (const auto& row : table.rows) {
    if (row.failed) return kExitCheckFailure;
  }
  return kExitOk;
}

int cmd_verify(const std::string& config_path, const std::string& out_path) {
  if (!config_path.empty()) {
    (void)ipix::harness::parse_run_config(config_path);  // schema gate only
  }
  const std::vector<ipix::harness::CheckResult> results = ipix::harness::verify();
  std::cout << ipix::harness::format_check_report(results);
  if (!out_path.empty()) {
    ipix::harness::write_check_report_json(results, out_path);
  }
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
  }
  std::printf("%zu/%zu checks passed\n", results.size() - failures, results.size());
  return failures == 0 ? kExitOk : kExitCheckFailure;
}

int cmd_report(const std::string& run_dir, const std::string& out_dir) {
  const ipix::harness::ReportResult res = ipix::harness::emit_reports(run_dir, out_dir);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& p : res.written) std::cout << "wrote " << p.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IPixMatch-style semi-supervised segmentation at desk scale"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, data_dir, run_dir;
  std::string seeds, methods, warmups, verify_out;
  int threads_override = 0;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", config_path, "gen config file")->required();
  gen->add_option("--out", out_dir, "output dataset directory")->required();

  CLI::App* train = app.add_subcommand("train", "run a training configuration");
  train->add_option("--config", config_path, "run config file")->required();
  train->add_option("--out", out_dir, "run output directory")->required();
  train->add_option("--threads", threads_override,
                    "override batch parallelism width (results identical)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint metadata file")->required();
  eval->add_option("--data", data_dir, "dataset directory")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "run a config/seed sweep");
  ablate->add_option("--config", config_path, "base run config file")->required();
  ablate->add_option("--seeds", seeds, "comma-separated seed list")->required();
  ablate->add_option("--out", out_dir, "sweep output directory")->required();
  ablate->add_option("--methods", methods, "comma-separated method variants");
  ablate->add_option("--warmup", warmups, "comma-separated 0/1 warmup variants");

  CLI::App* verify = app.add_subcommand("verify", "run all property/oracle checks");
  verify->add_option("--config", config_path, "optional config to schema-check");
  verify->add_option("--out", verify_out, "write JSON check report here");

  CLI::App* report = app.add_subcommand("report", "emit curves and prediction dumps");
  report->add_option("--run", run_dir, "completed run directory")->required();
  report->add_option("--out", out_dir, "report output directory")->required();

  std::string sub;
  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen(config_path, out_dir);
    if (train->parsed()) return cmd_train(config_path, out_dir, threads_override);
    if (eval->parsed()) return cmd_eval(checkpoint_path, data_dir);
    if (ablate->parsed()) return cmd_ablate(config_path, seeds, out_dir, methods, warmups);
    if (verify->parsed()) return cmd_verify(config_path, verify_out);
    if (report->parsed()) return cmd_report(run_dir, out_dir);
    return kExitConfigError;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  } catch (const ipix::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ipix::InvalidParameterError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ipix::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const ipix::IntegrityError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const ipix::VersionError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const ipix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
}
