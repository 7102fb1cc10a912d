#include "knnlab/quadrature.hpp"

#include <algorithm>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace knnlab {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix of the
// orthogonal polynomial family, weights are mu0 * (first eigenvector component)^2.
GaussRule golub_welsch(const Eigen::VectorXd& diagonal, const Eigen::VectorXd& off_diagonal, double mu0) {
  const Eigen::Index n = diagonal.size();
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jacobi(i, i) = diagonal(i);
    if (i + 1 < n) {
      jacobi(i, i + 1) = off_diagonal(i);
      jacobi(i + 1, i) = off_diagonal(i);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Golub-Welsch eigen-decomposition failed");
  }
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

// Symmetrize nodes/weights so odd integrands vanish to rounding.
void symmetrize(GaussRule& rule, double center) {
  const std::size_t n = rule.nodes.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double half = 0.5 * ((rule.nodes[j] - center) - (rule.nodes[i] - center));
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = center - half;
    rule.nodes[j] = center + half;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[n / 2] = center;
  }
}

}  // namespace

GaussRule gauss_hermite_probabilist(std::size_t points) {
  if (points == 0) {
    throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
  }
  const auto n = static_cast<Eigen::Index>(points);
  Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    off(i) = std::sqrt(static_cast<double>(i + 1));
  }
  GaussRule rule = golub_welsch(diagonal, off, 1.0);
  symmetrize(rule, 0.0);
  return rule;
}

GaussRule gauss_legendre(std::size_t points, double a, double b) {
  if (points == 0) {
    throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  }
  const auto n = static_cast<Eigen::Index>(points);
  Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double k = static_cast<double>(i + 1);
    off(i) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  GaussRule rule = golub_welsch(diagonal, off, 2.0);
  symmetrize(rule, 0.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

}  // namespace knnlab
