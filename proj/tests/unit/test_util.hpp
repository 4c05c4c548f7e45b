#pragma once

#include <random>
#include <vector>

#include "vtr/numerics/tensor.hpp"

namespace vtr::testing {

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline numerics::Tensor<double> random_param(numerics::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                                             double hi = 1.0) {
  const auto n = numerics::shape_numel(shape);
  return numerics::Tensor<double>::parameter(std::move(shape), random_values(n, rng, lo, hi));
}

}  // namespace vtr::testing
