#pragma once

#include <span>
#include <vector>

#include "ipixmatch/tensor.hpp"

namespace ipix::numerics {

// Probability vector; entries >= 0, sum 1 within 1e-9.
struct Distribution {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

// True iff `probs` is a valid Distribution.
bool is_distribution(std::span<const double> probs, double sum_tol = 1e-9);

// Per-pixel class softmax on a C x N logit matrix (row-major, class axis
// first). Max-subtraction per column.
Tensor softmax_over_classes(const Tensor& logits);

// Temperature softmax over a spatial logit vector:
//   s_i = exp(z_i/t) / sum_j exp(z_j/t)
Distribution spatial_softmax(std::span<const double> logits, double temperature);

// Pullback of spatial_softmax: given s = spatial_softmax(z, t) and a
// cotangent g = dL/ds, returns dL/dz.
std::vector<double> spatial_softmax_pullback(std::span<const double> probs,
                                             std::span<const double> cotangent,
                                             double temperature);

// KL(u || v) = sum_i u_i ln(u_i / v_i), in nats, with 0*ln(0/x) = 0.
double kl_divergence(std::span<const double> u, std::span<const double> v);

// Gradient of KL(u || v) with respect to the logits z that produced
// v = spatial_softmax(z, t). Equals (v_i * sum(u) - u_i) / t.
std::vector<double> kl_divergence_grad_logits(std::span<const double> u,
                                              std::span<const double> v,
                                              double temperature);

// Centered L2 norm threshold below which Pearson statistics are undefined.
inline constexpr double kPearsonDegenerateTol = 1e-12;

// 1 - Pearson correlation, in [0, 2]. Throws DegenerateInputError when
// either argument is (numerically) constant.
double pearson_distance(std::span<const double> u, std::span<const double> v);

// Gradient of pearson_distance(u, v) with respect to v.
std::vector<double> pearson_distance_grad_v(std::span<const double> u,
                                            std::span<const double> v);

}  // namespace ipix::numerics
