#pragma once

#include "knnlab/kernels.hpp"
#include "knnlab/neighbor_index.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace knnlab {

/// k_n = max(1, floor(n^c1)) clamped to n; c1 in (1/2, 1).
std::size_t schedule_k(std::uint64_t n, double c1);
/// b_n = n^(-c2); c2 in (0, 1/10).
double schedule_b(std::uint64_t n, double c2);
/// M_n = C_M sqrt(ln n); n >= 2, C_M > 0.
double schedule_M(std::uint64_t n, double C_M);

/// Throws InvalidSchedule unless c1 in (1/2, 1).
void validate_c1(double c1);
/// Throws InvalidSchedule unless c2 in (0, 1/10).
void validate_c2(double c2);
/// Throws InvalidSchedule unless C_M > 0.
void validate_C_M(double C_M);

enum class DegeneratePolicy { error, epsilon_radius };

struct EstimatorConfig {
  double c1 = 0.7;
  double c2 = 0.05;
  double C_M = 2.0;
  Kernel kernel{KernelSpec{}};
  DegeneratePolicy degenerate_policy = DegeneratePolicy::error;
  /// Replaces schedule_k(n, c1) when set (small hand-worked instances).
  std::optional<std::size_t> k_override;

  /// Validates the schedule bounds; throws InvalidSchedule.
  void validate() const;
  std::size_t neighbors_for(std::size_t n) const;
};

struct EstimateAtPoint {
  double value = 0.0;
  double radius_used = 0.0;
  std::size_t k_used = 0;
  /// Regression only: max(f_hat, b_n) took the floor b_n.
  bool floored = false;
};

struct SplitEstimate {
  double g1_hat = 0.0;
  double g2_hat = 0.0;
};

/// f_hat(x) = 1/(n R^p) sum_i K((X_i - x)/R), R = k-NN radius at x.
EstimateAtPoint density_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x);

/// g_hat(x) = 1/(n R^p) sum_i Y_i K((X_i - x)/R).
EstimateAtPoint g_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x);

/// Positive and negative response parts of g_hat sharing the same R.
SplitEstimate g_split_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x);

/// r_hat(x) = g_hat(x) / max(f_hat(x), b_n) with b_n = schedule_b(n, c2).
EstimateAtPoint regression_at(const NeighborIndex& index, const EstimatorConfig& config,
                              std::span<const double> x, std::uint64_t n);

/// All kernel sums at one point for a given bandwidth, accumulated with
/// compensated summation in sample order. Terms are pre-normalization.
struct KernelSums {
  double weight = 0.0;        // sum K
  double response = 0.0;      // sum Y K
  double positive = 0.0;      // sum Y 1{Y >= 0} K
  double negative = 0.0;      // sum (-Y) 1{Y < 0} K
  double abs_response = 0.0;  // sum |Y K|
};

enum class SumSelection { weight_only, with_responses };

KernelSums kernel_sums(const SampleSet& data, const Kernel& kernel, std::span<const double> x, double bandwidth,
                       SumSelection selection);

/// Sum of K((X_i - x)/inner) / (n outer^p): fixed-bandwidth estimator with a
/// separate normalizing bandwidth.
double fixed_bandwidth_density(const SampleSet& data, const Kernel& kernel, std::span<const double> x,
                               double inner, double outer);

/// Radius actually used at x after applying the degenerate policy.
double resolve_radius(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x,
                      std::size_t k);

}  // namespace knnlab
