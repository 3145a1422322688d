#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ipixmatch/rng.hpp"
#include "ipixmatch/tensor.hpp"

namespace testutil {

inline ipix::Tensor random_map(ipix::Rng& rng, std::size_t c, std::size_t h,
                               std::size_t w, double scale) {
  ipix::Tensor t = ipix::Tensor::zeros({c, h, w});
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

inline std::vector<double> random_vec(ipix::Rng& rng, std::size_t n, double lo,
                                      double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Central finite differences, step 1e-5.
inline std::vector<double> central_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double grad_rel_error(const std::vector<double>& a,
                             const std::vector<double>& b) {
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

}  // namespace testutil
