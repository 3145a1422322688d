#include "ipixmatch/ipixloss.hpp"

#include <cmath>
#include <vector>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/numerics.hpp"
#include "ipixmatch/pseudo.hpp"

namespace ipix::ipixloss {

namespace {

void check_pair(const Tensor& p, const Tensor& q, const IPixConfig& cfg,
                const char* what) {
  if (p.shape.size() != 3) {
    throw ShapeError(std::string(what) + ": expected C x H x W logit maps");
  }
  if (!p.same_shape(q)) {
    throw ShapeError(std::string(what) + ": p and q shapes differ");
  }
  if (!(cfg.temperature > 0.0)) {
    throw InvalidParameterError(std::string(what) + ": temperature must be > 0");
  }
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) {
    throw InvalidParameterError(std::string(what) + ": tau must be in [0,1]");
  }
  require_finite(p, what);
  require_finite(q, what);
}

bool nearly_constant(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double sq = 0.0;
  for (double v : x) sq += (v - mean) * (v - mean);
  return std::sqrt(sq) < numerics::kPearsonDegenerateTol;
}

}  // namespace

IPixResult interpixel_loss(const Tensor& p, const Tensor& q, const IPixConfig& cfg) {
  check_pair(p, q, cfg, "interpixel_loss");
  const std::size_t c = p.shape[0];
  const std::size_t hw = p.shape[1] * p.shape[2];

  IPixResult res;
  res.grad_q = Tensor::zeros(p.shape);

  const pseudo::ConfidenceMask mask = pseudo::confidence_mask(p, cfg.tau);
  res.omega_size = mask.size();
  if (mask.size() <= 1) {
    res.skipped = true;
    return res;
  }

  const std::size_t m = mask.size();
  const double norm = 1.0 / (static_cast<double>(c) * std::log(static_cast<double>(m)));

  std::vector<double> pk(m), qk(m);
  double total = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double* p_ch = p.data.data() + k * hw;
    const double* q_ch = q.data.data() + k * hw;
    for (std::size_t i = 0; i < m; ++i) {
      pk[i] = p_ch[mask.pixel_indices[i]];
      qk[i] = q_ch[mask.pixel_indices[i]];
    }
    const numerics::Distribution u = numerics::spatial_softmax(pk, cfg.temperature);
    const numerics::Distribution v = numerics::spatial_softmax(qk, cfg.temperature);

    std::vector<double> grad_z;  // d phi / d (masked q logits)
    double phi = 0.0;
    if (cfg.metric == RelationMetric::KL) {
      phi = numerics::kl_divergence(u.probs, v.probs);
      grad_z = numerics::kl_divergence_grad_logits(u.probs, v.probs, cfg.temperature);
    } else {
      // A constant restricted channel has no Pearson statistics; it carries
      // no relational signal and contributes 0.
      if (nearly_constant(u.probs) || nearly_constant(v.probs)) {
        ++res.degenerate_channels;
        continue;
      }
      phi = numerics::pearson_distance(u.probs, v.probs);
      const std::vector<double> grad_v =
          numerics::pearson_distance_grad_v(u.probs, v.probs);
      grad_z = numerics::spatial_softmax_pullback(v.probs, grad_v, cfg.temperature);
    }
    total += phi;
    double* g_ch = res.grad_q.data.data() + k * hw;
    for (std::size_t i = 0; i < m; ++i) {
      g_ch[mask.pixel_indices[i]] = grad_z[i] * norm;
    }
  }
  res.value = total * norm;
  return res;
}

// Everything below is deliberately written as plain loops from the loss
// definition, independent of the implementation above.
double interpixel_loss_reference(const Tensor& p, const Tensor& q,
                                 const IPixConfig& cfg) {
  check_pair(p, q, cfg, "interpixel_loss_reference");
  const std::size_t c = p.shape[0];
  const std::size_t hw = p.shape[1] * p.shape[2];

  // Omega = { j : max_k Softmax(p[:,j])_k > tau }
  std::vector<std::size_t> omega;
  for (std::size_t j = 0; j < hw; ++j) {
    double mx = p.data[j];
    for (std::size_t k = 1; k < c; ++k) {
      if (p.data[k * hw + j] > mx) mx = p.data[k * hw + j];
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < c; ++k) denom += std::exp(p.data[k * hw + j] - mx);
    double max_prob = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double prob = std::exp(p.data[k * hw + j] - mx) / denom;
      if (prob > max_prob) max_prob = prob;
    }
    if (max_prob > cfg.tau) omega.push_back(j);
  }
  if (omega.size() <= 1) return 0.0;
  const std::size_t m = omega.size();

  auto temp_softmax = [&](const Tensor& t, std::size_t k) {
    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = t.data[k * hw + omega[i]];
    double mx = z[0];
    for (double v : z) {
      if (v > mx) mx = v;
    }
    std::vector<double> s(m);
    double denom = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = std::exp((z[i] - mx) / cfg.temperature);
      denom += s[i];
    }
    for (double& v : s) v /= denom;
    return s;
  };

  double total = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const std::vector<double> u = temp_softmax(p, k);
    const std::vector<double> v = temp_softmax(q, k);
    if (cfg.metric == RelationMetric::KL) {
      for (std::size_t i = 0; i < m; ++i) {
        if (u[i] > 0.0) total += u[i] * std::log(u[i] / v[i]);
      }
    } else {
      double mu = 0.0, mv = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        mu += u[i];
        mv += v[i];
      }
      mu /= static_cast<double>(m);
      mv /= static_cast<double>(m);
      double dot = 0.0, nu = 0.0, nv = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        dot += (u[i] - mu) * (v[i] - mv);
        nu += (u[i] - mu) * (u[i] - mu);
        nv += (v[i] - mv) * (v[i] - mv);
      }
      if (std::sqrt(nu) < 1e-12 || std::sqrt(nv) < 1e-12) continue;
      total += 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
    }
  }
  return total / (static_cast<double>(c) * std::log(static_cast<double>(m)));
}

}  // namespace ipix::ipixloss
