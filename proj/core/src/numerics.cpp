#include "ipixmatch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipixmatch/errors.hpp"

namespace ipix::numerics {

bool is_distribution(std::span<const double> probs, double sum_tol) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= sum_tol;
}

Tensor softmax_over_classes(const Tensor& logits) {
  if (logits.shape.size() < 2) {
    throw ShapeError("softmax_over_classes: expected at least 2 dims (C first)");
  }
  require_finite(logits, "softmax_over_classes");
  const std::size_t c = logits.shape[0];
  const std::size_t n = logits.size() / c;
  Tensor out = Tensor::zeros(logits.shape);
  for (std::size_t j = 0; j < n; ++j) {
    double mx = logits.data[j];
    for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, logits.data[k * n + j]);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double e = std::exp(logits.data[k * n + j] - mx);
      out.data[k * n + j] = e;
      sum += e;
    }
    for (std::size_t k = 0; k < c; ++k) out.data[k * n + j] /= sum;
  }
  return out;
}

Distribution spatial_softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw InvalidParameterError("spatial_softmax: temperature must be > 0, got " +
                                std::to_string(temperature));
  }
  if (logits.empty()) {
    throw ShapeError("spatial_softmax: empty logit vector");
  }
  require_finite(logits, "spatial_softmax");
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  Distribution d;
  d.probs.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    d.probs[i] = std::exp((logits[i] - mx) / temperature);
    sum += d.probs[i];
  }
  for (double& p : d.probs) p /= sum;
  return d;
}

std::vector<double> spatial_softmax_pullback(std::span<const double> probs,
                                             std::span<const double> cotangent,
                                             double temperature) {
  if (probs.size() != cotangent.size()) {
    throw ShapeError("spatial_softmax_pullback: size mismatch");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += cotangent[i] * probs[i];
  std::vector<double> grad(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    grad[i] = probs[i] * (cotangent[i] - dot) / temperature;
  }
  return grad;
}

double kl_divergence(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("kl_divergence: length mismatch " + std::to_string(u.size()) +
                     " vs " + std::to_string(v.size()));
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    if (v[i] <= 0.0) {
      throw DivergenceUndefinedError(
          "kl_divergence: v is 0 at index " + std::to_string(i) + " where u > 0");
    }
    kl += u[i] * std::log(u[i] / v[i]);
  }
  return kl;
}

std::vector<double> kl_divergence_grad_logits(std::span<const double> u,
                                              std::span<const double> v,
                                              double temperature) {
  if (u.size() != v.size()) {
    throw ShapeError("kl_divergence_grad_logits: length mismatch");
  }
  double u_sum = 0.0;
  for (double x : u) u_sum += x;
  std::vector<double> grad(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    grad[i] = (v[i] * u_sum - u[i]) / temperature;
  }
  return grad;
}

namespace {

struct Centered {
  std::vector<double> values;  // x - mean(x)
  double norm;                 // ||x - mean(x)||_2
};

Centered center(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  Centered c;
  c.values.resize(x.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c.values[i] = x[i] - mean;
    sq += c.values[i] * c.values[i];
  }
  c.norm = std::sqrt(sq);
  return c;
}

}  // namespace

double pearson_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("pearson_distance: length mismatch");
  }
  if (u.size() < 2) {
    throw ShapeError("pearson_distance: need at least 2 entries");
  }
  const Centered cu = center(u);
  const Centered cv = center(v);
  if (cu.norm < kPearsonDegenerateTol || cv.norm < kPearsonDegenerateTol) {
    throw DegenerateInputError("pearson_distance: constant input vector");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += cu.values[i] * cv.values[i];
  const double rho = dot / (cu.norm * cv.norm);
  return 1.0 - std::clamp(rho, -1.0, 1.0);
}

std::vector<double> pearson_distance_grad_v(std::span<const double> u,
                                            std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 2) {
    throw ShapeError("pearson_distance_grad_v: bad lengths");
  }
  const Centered cu = center(u);
  const Centered cv = center(v);
  if (cu.norm < kPearsonDegenerateTol || cv.norm < kPearsonDegenerateTol) {
    throw DegenerateInputError("pearson_distance_grad_v: constant input vector");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += cu.values[i] * cv.values[i];
  const double rho = dot / (cu.norm * cv.norm);
  // d rho / d v_j = uc_j / (|uc||vc|) - rho * vc_j / |vc|^2  (centering drops
  // out because sum(uc) = sum(vc) = 0); distance flips the sign.
  std::vector<double> grad(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    grad[j] = -(cu.values[j] / (cu.norm * cv.norm) -
                rho * cv.values[j] / (cv.norm * cv.norm));
  }
  return grad;
}

}  // namespace ipix::numerics
