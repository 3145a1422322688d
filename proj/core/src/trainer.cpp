#include "ipixmatch/trainer.hpp"

#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "ipixmatch/augment.hpp"
#include "ipixmatch/errors.hpp"
#include "ipixmatch/rng.hpp"

namespace ipix::trainer {

namespace {

constexpr std::uint64_t kLabeledSlot = 1ULL << 32;
constexpr std::uint64_t kUnlabeledSlot = 2ULL << 32;
constexpr std::uint64_t kStrongOffset = 3ULL << 32;

struct SampleResult {
  double l_sup = 0.0;
  double l_unsup = 0.0;
  double l_ipix = 0.0;
  double omega_fraction = 0.0;
  model::GradientBundle grads;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers with a static
// partition; callers read results in index order afterwards.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

void check_finite_component(double v, const char* name, std::int64_t iter) {
  if (!std::isfinite(v)) {
    throw Error("train_step: non-finite " + std::string(name) + " at iteration " +
                std::to_string(iter));
  }
}

}  // namespace

TrainerState make_trainer(std::uint64_t seed, std::size_t hidden_channels,
                          std::size_t num_classes) {
  TrainerState state;
  state.student = model::init_params(seed, hidden_channels, num_classes);
  state.teacher = state.student;
  state.velocity = model::GradientBundle::zeros_like(state.student);
  state.iteration = 0;
  state.run_seed = seed;
  return state;
}

baseline::LossReport train_step(TrainerState& state,
                                std::span<const data::Sample> labeled,
                                std::span<const data::Sample> unlabeled,
                                const TrainStepConfig& cfg) {
  const bool use_unlabeled = cfg.method != Method::SUP_ONLY;
  if (labeled.empty() && !use_unlabeled) {
    throw InvalidParameterError("train_step: supervised-only step needs labeled data");
  }
  if (labeled.empty() && unlabeled.empty()) {
    throw InvalidParameterError("train_step: both batches empty");
  }

  const baseline::WarmupSchedule schedule{cfg.warmup_iters, cfg.alpha_max};
  const double alpha = cfg.warmup_enabled
                           ? baseline::warmup_alpha(state.iteration, schedule)
                           : cfg.alpha_max;
  const bool use_ipix = use_unlabeled &&
                        (cfg.method == Method::IPIX_KL || cfg.method == Method::IPIX_CR) &&
                        cfg.alpha_max > 0.0;
  ipixloss::IPixConfig ipix_cfg;
  ipix_cfg.metric = cfg.method == Method::IPIX_CR ? ipixloss::RelationMetric::CR
                                                  : ipixloss::RelationMetric::KL;
  ipix_cfg.temperature = cfg.temperature;
  ipix_cfg.tau = cfg.tau;

  const std::uint64_t iter_seed =
      hash_seed(state.run_seed, static_cast<std::uint64_t>(state.iteration));

  // Per-sample results are computed independently and reduced in slot order,
  // so the thread count never affects the outcome.
  std::vector<SampleResult> sup_results(labeled.size());
  parallel_for(labeled.size(), cfg.threads, [&](std::size_t i) {
    const std::uint64_t seed = hash_seed(iter_seed, kLabeledSlot + i);
    const augment::AugmentedPair pair =
        augment::weak_augment(labeled[i].image, &labeled[i].label, seed);
    model::ForwardCache cache;
    const Tensor logits = model::forward(state.student, pair.weak_image, &cache);
    const baseline::CrossEntropyResult ce =
        baseline::supervised_loss(logits, pair.label);
    SampleResult& r = sup_results[i];
    r.l_sup = ce.loss;
    Tensor cotangent = ce.grad_logits;
    const double inv = 1.0 / static_cast<double>(labeled.size());
    for (double& v : cotangent.data) v *= inv;
    r.grads = model::backward(state.student, cache, cotangent);
  });

  std::vector<SampleResult> unsup_results(use_unlabeled ? unlabeled.size() : 0);
  if (use_unlabeled) {
    parallel_for(unlabeled.size(), cfg.threads, [&](std::size_t i) {
      const std::uint64_t seed = hash_seed(iter_seed, kUnlabeledSlot + i);
      const augment::AugmentedPair pair =
          augment::weak_augment(unlabeled[i].image, nullptr, seed);
      const Tensor strong =
          augment::strong_augment(pair.weak_image, hash_seed(iter_seed, kStrongOffset + i));

      const Tensor p = model::forward(state.teacher, pair.weak_image);  // no grad
      model::ForwardCache cache;
      const Tensor q = model::forward(state.student, strong, &cache);

      const baseline::FixmatchResult fm = baseline::fixmatch_unsup_loss(p, q, cfg.tau);
      SampleResult& r = unsup_results[i];
      r.l_unsup = fm.loss;
      const std::size_t hw = p.shape[1] * p.shape[2];
      r.omega_fraction =
          static_cast<double>(fm.omega_size) / static_cast<double>(hw);

      const double inv = 1.0 / static_cast<double>(unlabeled.size());
      Tensor cotangent = fm.grad_student;
      for (double& v : cotangent.data) v *= inv;
      if (use_ipix) {
        const ipixloss::IPixResult ip = ipixloss::interpixel_loss(p, q, ipix_cfg);
        r.l_ipix = ip.value;
        for (std::size_t k = 0; k < cotangent.data.size(); ++k) {
          cotangent.data[k] += alpha * inv * ip.grad_q.data[k];
        }
      }
      r.grads = model::backward(state.student, cache, cotangent);
    });
  }

  double l_sup = 0.0, l_unsup = 0.0, l_ipix = 0.0, omega_fraction = 0.0;
  model::GradientBundle total = model::GradientBundle::zeros_like(state.student);
  for (const SampleResult& r : sup_results) {
    l_sup += r.l_sup;
    total.accumulate(r.grads);
  }
  if (!labeled.empty()) l_sup /= static_cast<double>(labeled.size());
  for (const SampleResult& r : unsup_results) {
    l_unsup += r.l_unsup;
    l_ipix += r.l_ipix;
    omega_fraction += r.omega_fraction;
    total.accumulate(r.grads);
  }
  if (!unsup_results.empty()) {
    const double inv = 1.0 / static_cast<double>(unsup_results.size());
    l_unsup *= inv;
    l_ipix *= inv;
    omega_fraction *= inv;
  }

  check_finite_component(l_sup, "l_sup", state.iteration);
  check_finite_component(l_unsup, "l_unsup", state.iteration);
  check_finite_component(l_ipix, "l_ipix", state.iteration);

  // Methods without an inter-pixel term report a zero weight so their logs
  // match an inter-pixel run whose weight is pinned to zero.
  const baseline::WarmupSchedule report_schedule{
      cfg.warmup_iters, use_ipix ? cfg.alpha_max : 0.0};
  const baseline::LossReport report = baseline::total_loss(
      l_sup, l_unsup, l_ipix, state.iteration, report_schedule,
      cfg.warmup_enabled, omega_fraction);
  check_finite_component(report.l_sum, "l_sum", state.iteration);

  model::sgd_step(state.student, total, cfg.lr, cfg.momentum, state.velocity);
  model::ema_update(state.teacher, state.student, cfg.ema_m);
  state.iteration += 1;
  return report;
}

}  // namespace ipix::trainer
