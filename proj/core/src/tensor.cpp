#include "ipixmatch/tensor.hpp"

#include <cmath>
#include <string>

#include "ipixmatch/errors.hpp"

namespace ipix {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.data.assign(shape_product(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw InvalidInputError(std::string(what) + ": non-finite entry at index " +
                              std::to_string(i));
    }
  }
}

void require_finite(const Tensor& t, const char* what) {
  require_finite(std::span<const double>(t.data), what);
}

}  // namespace ipix
