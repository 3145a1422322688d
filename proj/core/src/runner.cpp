#include "ipixmatch/runner.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipixmatch/checkpoint.hpp"
#include "ipixmatch/errors.hpp"
#include "ipixmatch/rng.hpp"
#include "ipixmatch/trainer.hpp"

namespace ipix::harness {

namespace {

constexpr std::uint64_t kUnlabeledOrder = 0x756f7264ULL;
constexpr std::uint64_t kLabeledOrder = 0x6c6f7264ULL;

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Deterministic permutation of [0, n) keyed by (seed, stream, block).
std::vector<std::size_t> permutation(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t block, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(hash_seed(hash_seed(seed, stream), block));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

// Endless shuffled stream over a fixed index set; reshuffles per block.
class IndexStream {
 public:
  IndexStream(std::uint64_t seed, std::uint64_t stream, std::vector<std::size_t> pool)
      : seed_(seed), stream_(stream), pool_(std::move(pool)) {}

  std::size_t next() {
    if (pos_ == order_.size()) {
      std::vector<std::size_t> perm = permutation(seed_, stream_, block_++, pool_.size());
      order_.resize(pool_.size());
      for (std::size_t i = 0; i < pool_.size(); ++i) order_[i] = pool_[perm[i]];
      pos_ = 0;
    }
    return order_[pos_++];
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::uint64_t block_ = 0;
};

}  // namespace

RunResult run_training(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const data::Dataset dataset = data::load_dataset(cfg.dataset);
  const std::size_t count = dataset.manifest.count;

  std::vector<std::size_t> labeled_idx = dataset.manifest.labeled_indices;
  std::vector<bool> is_labeled(count, false);
  for (std::size_t i : labeled_idx) is_labeled[i] = true;
  std::vector<std::size_t> unlabeled_idx;
  for (std::size_t i = 0; i < count; ++i) {
    if (!is_labeled[i]) unlabeled_idx.push_back(i);
  }
  if (labeled_idx.empty()) {
    throw ConfigError("run_training: dataset has no labeled samples");
  }

  // An epoch is one pass over the method's own training stream: the labeled
  // subset for SUP_ONLY, the unlabeled set for the semi-supervised methods
  // (the convention supervised baselines are trained under in the
  // semi-supervised segmentation literature).
  const bool sup_only_stream =
      cfg.method == trainer::Method::SUP_ONLY || unlabeled_idx.empty();
  const std::size_t stream_len =
      sup_only_stream ? labeled_idx.size() : unlabeled_idx.size();
  const std::size_t stream_batch =
      sup_only_stream ? cfg.batch_labeled : cfg.batch_unlabeled;
  const std::size_t steps_per_epoch = std::max<std::size_t>(1, stream_len / stream_batch);

  trainer::TrainStepConfig step_cfg;
  step_cfg.method = cfg.method;
  step_cfg.lr = cfg.lr;
  step_cfg.momentum = cfg.momentum;
  step_cfg.ema_m = cfg.ema_m;
  step_cfg.tau = cfg.tau;
  step_cfg.temperature = cfg.temperature;
  step_cfg.alpha_max = cfg.alpha_max;
  step_cfg.warmup_enabled = cfg.warmup_enabled;
  step_cfg.warmup_iters =
      std::max<std::int64_t>(1, cfg.warmup_epochs * static_cast<std::int64_t>(steps_per_epoch));
  step_cfg.threads = cfg.threads;

  trainer::TrainerState state = trainer::make_trainer(
      cfg.seed, cfg.hidden_channels, dataset.manifest.num_classes);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream cf(out_dir / "config.txt");
    if (!cf) throw IoError("cannot write config.txt in " + out_dir.string());
    cf << canonical_text(cfg);
  }
  std::ofstream log(out_dir / "metrics.csv");
  if (!log) throw IoError("cannot write metrics.csv in " + out_dir.string());
  log << "iter,epoch,l_sup,l_unsup,l_ipix,alpha,omega_fraction,l_sum,miou_eval,"
         "wall_seconds\n";

  const bool use_unlabeled =
      cfg.method != trainer::Method::SUP_ONLY && !unlabeled_idx.empty();
  IndexStream labeled_stream(cfg.seed, kLabeledOrder, labeled_idx);
  IndexStream unlabeled_stream(cfg.seed, kUnlabeledOrder, unlabeled_idx);

  const std::vector<std::size_t>& eval_idx =
      unlabeled_idx.empty() ? labeled_idx : unlabeled_idx;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  const std::uint64_t cfg_hash = config_hash(cfg);
  auto write_ckpt = [&] {
    Checkpoint ckpt;
    ckpt.student = state.student;
    ckpt.teacher = state.teacher;
    ckpt.iteration = state.iteration;
    ckpt.seed = cfg.seed;
    ckpt.config_hash = cfg_hash;
    save_checkpoint(ckpt, out_dir / "checkpoint.json");
  };

  RunResult result;
  result.run_dir = out_dir;
  std::vector<data::Sample> labeled_batch(cfg.batch_labeled);
  std::vector<data::Sample> unlabeled_batch;
  try {
    for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      for (std::size_t step = 0; step < steps_per_epoch; ++step) {
        for (std::size_t i = 0; i < cfg.batch_labeled; ++i) {
          labeled_batch[i] = dataset.samples[labeled_stream.next()];
        }
        unlabeled_batch.clear();
        if (use_unlabeled) {
          for (std::size_t i = 0; i < cfg.batch_unlabeled; ++i) {
            unlabeled_batch.push_back(dataset.samples[unlabeled_stream.next()]);
          }
        }
        const baseline::LossReport report =
            trainer::train_step(state, labeled_batch, unlabeled_batch, step_cfg);

        const bool eval_now =
            step + 1 == steps_per_epoch &&
            (epoch % cfg.eval_every == 0 || epoch == cfg.epochs);
        std::string miou_field;
        if (eval_now) {
          const Metrics m = evaluate_dataset(state.student, dataset, eval_idx);
          miou_field = fmt9(m.miou);
          result.final_metrics = m;
          write_ckpt();
        }
        log << state.iteration << ',' << epoch << ',' << fmt9(report.l_sup) << ','
            << fmt9(report.l_unsup) << ',' << fmt9(report.l_ipix) << ','
            << fmt9(report.alpha) << ',' << fmt9(report.omega_fraction) << ','
            << fmt9(report.l_sum) << ',' << miou_field << ',' << fmt9(elapsed())
            << '\n';
      }
    }
  } catch (const Error&) {
    log.flush();  // last-good checkpoint (if any) stays on disk
    throw;
  }
  result.iterations = state.iteration;

  {
    nlohmann::json j;
    j["miou"] = result.final_metrics.miou;
    j["per_class_iou"] = result.final_metrics.per_class_iou;
    j["iterations"] = result.iterations;
    std::ofstream fm(out_dir / "final_metrics.json");
    if (!fm) throw IoError("cannot write final_metrics.json");
    fm << j.dump(2) << "\n";
  }
  return result;
}

}  // namespace ipix::harness
