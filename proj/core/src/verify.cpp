#include "ipixmatch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include <nlohmann/json.hpp>

#include "ipixmatch/baseline.hpp"
#include "ipixmatch/errors.hpp"
#include "ipixmatch/ipixloss.hpp"
#include "ipixmatch/model.hpp"
#include "ipixmatch/numerics.hpp"
#include "ipixmatch/pseudo.hpp"
#include "ipixmatch/rng.hpp"

namespace ipix::harness {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-6;

// Relative error between two gradient vectors: ||a - b|| / max(||a||, ||b||);
// 0 when both vanish.
double grad_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom == 0.0) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + kFdStep;
    const double up = f(x);
    x[i] = orig - kFdStep;
    const double down = f(x);
    x[i] = orig;
    grad[i] = (up - down) / (2.0 * kFdStep);
  }
  return grad;
}

Tensor random_logit_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w,
                        double scale) {
  Tensor t = Tensor::zeros({c, h, w});
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

double check_fd_spatial_softmax(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 16));
    const double t = rng.uniform(0.5, 8.0);
    std::vector<double> z(n), g(n);
    for (double& v : z) v = rng.uniform(-3.0, 3.0);
    for (double& v : g) v = rng.uniform(-1.0, 1.0);
    const numerics::Distribution s = numerics::spatial_softmax(z, t);
    const std::vector<double> analytic = numerics::spatial_softmax_pullback(s.probs, g, t);
    const std::vector<double> fd = central_diff(
        [&](const std::vector<double>& zz) {
          const numerics::Distribution ss = numerics::spatial_softmax(zz, t);
          double dot = 0.0;
          for (std::size_t i = 0; i < ss.size(); ++i) dot += g[i] * ss[i];
          return dot;
        },
        z);
    worst = std::max(worst, grad_rel_error(analytic, fd));
  }
  return worst;
}

double check_fd_kl(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 16));
    const double t = rng.uniform(0.5, 8.0);
    std::vector<double> zu(n), zv(n);
    for (double& v : zu) v = rng.uniform(-3.0, 3.0);
    for (double& v : zv) v = rng.uniform(-3.0, 3.0);
    const numerics::Distribution u = numerics::spatial_softmax(zu, 1.0);
    const numerics::Distribution v = numerics::spatial_softmax(zv, t);
    const std::vector<double> analytic =
        numerics::kl_divergence_grad_logits(u.probs, v.probs, t);
    const std::vector<double> fd = central_diff(
        [&](const std::vector<double>& zz) {
          const numerics::Distribution vv = numerics::spatial_softmax(zz, t);
          return numerics::kl_divergence(u.probs, vv.probs);
        },
        zv);
    worst = std::max(worst, grad_rel_error(analytic, fd));
  }
  return worst;
}

double check_fd_pearson(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(3, 16));
    std::vector<double> u(n), v(n);
    for (double& x : u) x = rng.uniform(-2.0, 2.0);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    const std::vector<double> analytic = numerics::pearson_distance_grad_v(u, v);
    const std::vector<double> fd = central_diff(
        [&](const std::vector<double>& vv) { return numerics::pearson_distance(u, vv); },
        v);
    worst = std::max(worst, grad_rel_error(analytic, fd));
  }
  return worst;
}

// Returns {worst relative error on Omega pixels, worst |fd| off Omega}.
std::pair<double, double> check_fd_interpixel(Rng& rng, ipixloss::RelationMetric metric) {
  double worst = 0.0;
  double worst_off_omega = 0.0;
  int done = 0;
  while (done < 50) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t h = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t w = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const Tensor p = random_logit_map(rng, c, h, w, 4.0);
    const Tensor q = random_logit_map(rng, c, h, w, 2.0);
    ipixloss::IPixConfig cfg;
    cfg.metric = metric;
    cfg.tau = 0.4;  // keeps |Omega| >= 2 likely on small maps
    const ipixloss::IPixResult res = ipixloss::interpixel_loss(p, q, cfg);
    if (res.skipped || (metric == ipixloss::RelationMetric::CR && res.degenerate_channels > 0)) {
      continue;
    }
    ++done;
    const pseudo::ConfidenceMask mask = pseudo::confidence_mask(p, cfg.tau);
    std::vector<bool> in_omega(h * w, false);
    for (std::size_t j : mask.pixel_indices) in_omega[j] = true;

    Tensor qq = q;
    const std::size_t hw = h * w;
    for (std::size_t k = 0; k < c * hw; ++k) {
      const double orig = qq.data[k];
      qq.data[k] = orig + kFdStep;
      const double up = ipixloss::interpixel_loss(p, qq, cfg).value;
      qq.data[k] = orig - kFdStep;
      const double down = ipixloss::interpixel_loss(p, qq, cfg).value;
      qq.data[k] = orig;
      const double fd = (up - down) / (2.0 * kFdStep);
      if (in_omega[k % hw]) {
        const double denom = std::max({std::abs(fd), std::abs(res.grad_q.data[k]), 1e-6});
        worst = std::max(worst, std::abs(fd - res.grad_q.data[k]) / denom);
      } else {
        worst_off_omega = std::max(worst_off_omega, std::abs(fd));
      }
    }
  }
  return {worst, worst_off_omega};
}

double check_fd_supervised(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t h = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t w = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const Tensor logits = random_logit_map(rng, c, h, w, 2.0);
    std::vector<std::uint8_t> labels(h * w);
    for (std::uint8_t& l : labels) {
      l = rng.bernoulli(0.2) ? baseline::kUnlabeledId
                             : static_cast<std::uint8_t>(
                                   rng.uniform_int(0, static_cast<std::int64_t>(c) - 1));
    }
    bool any = false;
    for (std::uint8_t l : labels) any = any || l != baseline::kUnlabeledId;
    if (!any) labels[0] = 0;
    const baseline::CrossEntropyResult res = baseline::supervised_loss(logits, labels);
    const std::vector<double> fd = central_diff(
        [&](const std::vector<double>& x) {
          Tensor t = logits;
          t.data = x;
          return baseline::supervised_loss(t, labels).loss;
        },
        logits.data);
    worst = std::max(worst, grad_rel_error(res.grad_logits.data, fd));
  }
  return worst;
}

double check_fd_fixmatch(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t h = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t w = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const Tensor p = random_logit_map(rng, c, h, w, 4.0);
    const Tensor q = random_logit_map(rng, c, h, w, 2.0);
    const baseline::FixmatchResult res = baseline::fixmatch_unsup_loss(p, q, 0.5);
    if (res.omega_size == 0) continue;
    const std::vector<double> fd = central_diff(
        [&](const std::vector<double>& x) {
          Tensor t = q;
          t.data = x;
          return baseline::fixmatch_unsup_loss(p, t, 0.5).loss;
        },
        q.data);
    worst = std::max(worst, grad_rel_error(res.grad_student.data, fd));
  }
  return worst;
}

// Full finite-difference sweep of one layer of a 3 -> 4 -> 4 -> 2 model on a
// 5x5 input. The corruption hook perturbs the analytic gradient.
double check_fd_model_layer(Rng& rng, std::size_t layer, const VerifyOptions& opt) {
  model::ModelParams params = model::init_params(rng.next_u64(), 4, 2);
  Tensor image = Tensor::zeros({3, 5, 5});
  for (double& v : image.data) v = rng.uniform(0.0, 1.0);
  Tensor cot = Tensor::zeros({2, 5, 5});
  for (double& v : cot.data) v = rng.uniform(-1.0, 1.0);

  auto scalar = [&](const model::ModelParams& pp) {
    const Tensor logits = model::forward(pp, image);
    double dot = 0.0;
    for (std::size_t i = 0; i < logits.data.size(); ++i) dot += cot.data[i] * logits.data[i];
    return dot;
  };

  model::ForwardCache cache;
  (void)model::forward(params, image, &cache);
  model::GradientBundle analytic = model::backward(params, cache, cot);
  if (opt.corrupt_layer == static_cast<int>(layer)) {
    for (double& v : analytic.layers[layer].weights) v += opt.corruption;
  }

  std::vector<double> fd_w(params.layers[layer].weights.size());
  for (std::size_t i = 0; i < fd_w.size(); ++i) {
    const double orig = params.layers[layer].weights[i];
    params.layers[layer].weights[i] = orig + kFdStep;
    const double up = scalar(params);
    params.layers[layer].weights[i] = orig - kFdStep;
    const double down = scalar(params);
    params.layers[layer].weights[i] = orig;
    fd_w[i] = (up - down) / (2.0 * kFdStep);
  }
  std::vector<double> fd_b(params.layers[layer].bias.size());
  for (std::size_t i = 0; i < fd_b.size(); ++i) {
    const double orig = params.layers[layer].bias[i];
    params.layers[layer].bias[i] = orig + kFdStep;
    const double up = scalar(params);
    params.layers[layer].bias[i] = orig - kFdStep;
    const double down = scalar(params);
    params.layers[layer].bias[i] = orig;
    fd_b[i] = (up - down) / (2.0 * kFdStep);
  }
  return std::max(grad_rel_error(analytic.layers[layer].weights, fd_w),
                  grad_rel_error(analytic.layers[layer].bias, fd_b));
}

double check_oracle_interpixel(Rng& rng, ipixloss::RelationMetric metric) {
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t h = static_cast<std::size_t>(rng.uniform_int(2, 5));
    const std::size_t w = static_cast<std::size_t>(rng.uniform_int(2, 5));
    const Tensor p = random_logit_map(rng, c, h, w, 4.0);
    const Tensor q = random_logit_map(rng, c, h, w, 2.0);
    ipixloss::IPixConfig cfg;
    cfg.metric = metric;
    cfg.tau = 0.4;
    const ipixloss::IPixResult res = ipixloss::interpixel_loss(p, q, cfg);
    if (res.skipped) continue;
    ++done;
    const double ref = ipixloss::interpixel_loss_reference(p, q, cfg);
    worst = std::max(worst, std::abs(res.value - ref) / std::max(1e-30, std::abs(ref)));
  }
  return worst;
}

double check_oracle_cross_entropy(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const std::size_t h = 3, w = 3;
    const Tensor logits = random_logit_map(rng, c, h, w, 3.0);
    std::vector<std::uint8_t> labels(h * w);
    for (std::uint8_t& l : labels) {
      l = static_cast<std::uint8_t>(rng.uniform_int(0, static_cast<std::int64_t>(c) - 1));
    }
    // independent loop oracle
    double ref = 0.0;
    for (std::size_t j = 0; j < h * w; ++j) {
      double mx = logits.data[j];
      for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, logits.data[k * h * w + j]);
      double denom = 0.0;
      for (std::size_t k = 0; k < c; ++k) denom += std::exp(logits.data[k * h * w + j] - mx);
      ref -= std::log(std::exp(logits.data[labels[j] * h * w + j] - mx) / denom);
    }
    ref /= static_cast<double>(h * w);
    const double got = baseline::supervised_loss(logits, labels).loss;
    worst = std::max(worst, std::abs(got - ref));
  }
  return worst;
}

double check_ema_recurrence(Rng& rng) {
  // EMA teacher against the analytic recurrence on a recorded trajectory.
  const double m = 0.97;
  model::ModelParams student = model::init_params(rng.next_u64(), 3, 2);
  model::ModelParams teacher = student;
  std::vector<double> expected;
  for (const model::ConvLayer& l : teacher.layers) {
    expected.insert(expected.end(), l.weights.begin(), l.weights.end());
  }
  double worst = 0.0;
  for (int step = 0; step < 100; ++step) {
    for (model::ConvLayer& l : student.layers) {
      for (double& v : l.weights) v += rng.uniform(-0.01, 0.01);
    }
    model::ema_update(teacher, student, m);
    std::size_t pos = 0;
    for (const model::ConvLayer& l : student.layers) {
      for (double v : l.weights) {
        expected[pos] = m * expected[pos] + (1.0 - m) * v;
        ++pos;
      }
    }
    pos = 0;
    for (const model::ConvLayer& l : teacher.layers) {
      for (double v : l.weights) {
        worst = std::max(worst, std::abs(v - expected[pos]));
        ++pos;
      }
    }
  }
  return worst;
}

double check_warmup_formula() {
  const baseline::WarmupSchedule sched{200, 0.75};
  double worst = 0.0;
  for (std::int64_t i = 0; i <= 200; ++i) {
    const double frac = static_cast<double>(i) / 200.0;
    const double expect = 0.75 * std::exp(-5.0 * (1.0 - frac) * (1.0 - frac));
    worst = std::max(worst, std::abs(baseline::warmup_alpha(i, sched) - expect));
  }
  // constant after i_w, equal to alpha_max at i_w
  worst = std::max(worst, std::abs(baseline::warmup_alpha(10000, sched) - 0.75));
  return worst;
}

double check_warmup_monotone() {
  const baseline::WarmupSchedule sched{500, 1.0};
  double prev = -1.0;
  for (std::int64_t i = 0; i <= 600; ++i) {
    const double a = baseline::warmup_alpha(i, sched);
    if (a < prev) return 1.0;
    prev = a;
  }
  return 0.0;
}

double check_mask_monotone(Rng& rng) {
  for (int inst = 0; inst < 20; ++inst) {
    const Tensor p = random_logit_map(rng, 3, 4, 4, 4.0);
    std::vector<std::size_t> prev;
    for (double tau : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      const pseudo::ConfidenceMask mask = pseudo::confidence_mask(p, tau);
      if (tau > 0.0) {
        // mask(tau2) must be a subset of mask(tau1) for tau1 <= tau2
        if (!std::includes(prev.begin(), prev.end(), mask.pixel_indices.begin(),
                           mask.pixel_indices.end())) {
          return 1.0;
        }
      }
      prev = mask.pixel_indices;
    }
    if (pseudo::confidence_mask(p, 0.0).size() != 16) return 1.0;
    if (pseudo::confidence_mask(p, 1.0).size() != 0) return 1.0;
  }
  return 0.0;
}

double check_mask_shift_invariance(Rng& rng) {
  for (int inst = 0; inst < 20; ++inst) {
    Tensor p = random_logit_map(rng, 3, 4, 4, 4.0);
    const pseudo::ConfidenceMask base = pseudo::confidence_mask(p, 0.6);
    // per-pixel shift across all classes
    const std::size_t hw = 16;
    for (std::size_t j = 0; j < hw; ++j) {
      const double shift = rng.uniform(-10.0, 10.0);
      for (std::size_t k = 0; k < 3; ++k) p.data[k * hw + j] += shift;
    }
    const pseudo::ConfidenceMask shifted = pseudo::confidence_mask(p, 0.6);
    if (base.pixel_indices != shifted.pixel_indices) return 1.0;
  }
  return 0.0;
}

double check_ipix_identity(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Tensor p = random_logit_map(rng, 3, 4, 4, 4.0);
    for (auto metric : {ipixloss::RelationMetric::KL, ipixloss::RelationMetric::CR}) {
      ipixloss::IPixConfig cfg;
      cfg.metric = metric;
      cfg.tau = 0.4;
      const ipixloss::IPixResult res = ipixloss::interpixel_loss(p, p, cfg);
      if (res.skipped) continue;
      worst = std::max(worst, std::abs(res.value));
      for (double g : res.grad_q.data) worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

// Single confident channel vs flat student: normalized KL approaches 1.
double check_ipix_delta_vs_uniform() {
  const std::size_t h = 4, w = 4, hw = 16;
  const double gap = 40.0;
  // Only pixels 0 and 1 are confident, so Omega = {0, 1}. On Omega each
  // teacher channel is a (near-)delta: KL(delta || uniform) = ln|Omega|
  // per channel, which the C * ln|Omega| normalizer cancels to 1.
  Tensor p = Tensor::zeros({2, h, w});
  p.data[0] = gap / 2.0;
  p.data[hw + 0] = -gap / 2.0;
  p.data[1] = -gap / 2.0;
  p.data[hw + 1] = gap / 2.0;
  Tensor q = Tensor::zeros({2, h, w});  // flat -> uniform psi(q)
  ipixloss::IPixConfig cfg;
  cfg.metric = ipixloss::RelationMetric::KL;
  cfg.tau = 0.8;
  cfg.temperature = 4.0;
  const ipixloss::IPixResult res = ipixloss::interpixel_loss(p, q, cfg);
  if (res.skipped || res.omega_size != 2) return 1.0;
  return std::abs(res.value - 1.0);
}

double check_ipix_skip() {
  Tensor p = Tensor::zeros({2, 4, 4});  // uniform softmax 0.5 < tau
  Tensor q = p;
  ipixloss::IPixConfig cfg;
  cfg.tau = 0.8;
  const ipixloss::IPixResult res = ipixloss::interpixel_loss(p, q, cfg);
  return (res.skipped && res.value == 0.0) ? 0.0 : 1.0;
}

}  // namespace

std::vector<CheckResult> verify(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  auto add = [&results](std::string name, double tol, double observed) {
    results.push_back({std::move(name), tol, observed, observed <= tol});
  };

  Rng rng(0x1b1f5);

  add("fd.spatial_softmax", kFdTol, check_fd_spatial_softmax(rng));
  add("fd.kl_divergence", kFdTol, check_fd_kl(rng));
  add("fd.pearson_distance", kFdTol, check_fd_pearson(rng));
  {
    const auto [on, off] = check_fd_interpixel(rng, ipixloss::RelationMetric::KL);
    add("fd.interpixel_kl", kFdTol, on);
    add("fd.interpixel_kl.off_omega_zero", 0.0, off);
  }
  {
    const auto [on, off] = check_fd_interpixel(rng, ipixloss::RelationMetric::CR);
    add("fd.interpixel_cr", kFdTol, on);
    add("fd.interpixel_cr.off_omega_zero", 0.0, off);
  }
  add("fd.supervised_loss", kFdTol, check_fd_supervised(rng));
  add("fd.fixmatch_unsup_loss", kFdTol, check_fd_fixmatch(rng));
  for (std::size_t layer = 0; layer < 3; ++layer) {
    add("fd.model.layer" + std::to_string(layer), kFdTol,
        check_fd_model_layer(rng, layer, options));
  }
  add("oracle.interpixel_kl", 1e-10,
      check_oracle_interpixel(rng, ipixloss::RelationMetric::KL));
  add("oracle.interpixel_cr", 1e-10,
      check_oracle_interpixel(rng, ipixloss::RelationMetric::CR));
  add("oracle.cross_entropy", 1e-12, check_oracle_cross_entropy(rng));
  add("ema.recurrence_bit_exact", 0.0, check_ema_recurrence(rng));
  add("warmup.formula", 1e-12, check_warmup_formula());
  add("warmup.nondecreasing", 0.0, check_warmup_monotone());
  add("mask.monotone_and_extremes", 0.0, check_mask_monotone(rng));
  add("mask.shift_invariant", 0.0, check_mask_shift_invariance(rng));
  add("ipix.zero_when_q_equals_p", 1e-12, check_ipix_identity(rng));
  add("ipix.delta_vs_uniform_normalizer", 0.05, check_ipix_delta_vs_uniform());
  add("ipix.skipped_small_omega", 0.0, check_ipix_skip());
  return results;
}

std::size_t check_inventory_size() { return 23; }

std::string format_check_report(const std::vector<CheckResult>& results) {
  std::string out;
  char buf[160];
  for (const CheckResult& r : results) {
    std::snprintf(buf, sizeof(buf), "[%s] %-40s observed %.3e tolerance %.3e\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.observed, r.tolerance);
    out += buf;
  }
  return out;
}

void write_check_report_json(const std::vector<CheckResult>& results,
                             const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const CheckResult& r : results) {
    j.push_back({{"name", r.name},
                 {"tolerance", r.tolerance},
                 {"observed", r.observed},
                 {"pass", r.pass}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write check report: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace ipix::harness
