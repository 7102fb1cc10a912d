#pragma once

#include <cstddef>
#include <vector>

namespace knnlab {

/// One-dimensional Gauss rule: nodes and weights.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal weight,
/// sum_i w_i h(x_i) ~= integral h(u) phi(u) du with sum_i w_i = 1.
/// Exact for polynomials of degree <= 2 * points - 1.
GaussRule gauss_hermite_probabilist(std::size_t points);

/// Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(std::size_t points, double a = -1.0, double b = 1.0);

}  // namespace knnlab
