#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ipix {

// Dense row-major tensor of 64-bit reals. Shape {C,H,W} for logit/image maps,
// {C,N} for flattened per-pixel views.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {}

  static Tensor zeros(std::vector<std::size_t> shape);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Throws InvalidInputError naming `what` if any entry is NaN/Inf.
void require_finite(const Tensor& t, const char* what);
void require_finite(std::span<const double> v, const char* what);

}  // namespace ipix
