#include "knnlab/estimators.hpp"

#include "knnlab/errors.hpp"
#include "knnlab/summation.hpp"

#include <cmath>

namespace knnlab {

namespace {

// floor(n^c) that snaps to the nearest integer when n^c lies within a few
// ulps below it (1024^0.7 evaluates to 127.99999999999996 in double).
std::uint64_t floor_power(std::uint64_t n, double c) {
  const long double value = std::pow(static_cast<long double>(n), static_cast<long double>(c));
  const long double nearest = std::round(value);
  if (std::fabs(value - nearest) <= 1e-12L * std::max(1.0L, nearest)) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::floor(value));
}

double normalizer(std::size_t n, double radius, std::size_t p) {
  return 1.0 / (static_cast<double>(n) * std::pow(radius, static_cast<double>(p)));
}

void check_dimension(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x) {
  if (static_cast<std::size_t>(config.kernel.dimension()) != index.dimension()) {
    throw DimensionMismatch("kernel dimension " + std::to_string(config.kernel.dimension()) +
                            " differs from sample dimension " + std::to_string(index.dimension()));
  }
  if (x.size() != index.dimension()) {
    throw DimensionMismatch("query of dimension " + std::to_string(x.size()) + " against samples of dimension " +
                            std::to_string(index.dimension()));
  }
}

}  // namespace

void validate_c1(double c1) {
  if (!(c1 > 0.5 && c1 < 1.0)) {
    throw InvalidSchedule("c1 = " + std::to_string(c1) + " violates Assumption 5: c1 must lie in (1/2, 1)");
  }
}

void validate_c2(double c2) {
  if (!(c2 > 0.0 && c2 < 0.1)) {
    throw InvalidSchedule("c2 = " + std::to_string(c2) + " violates Assumption 6: c2 must lie in (0, 1/10)");
  }
}

void validate_C_M(double C_M) {
  if (!(C_M > 0.0) || !std::isfinite(C_M)) {
    throw InvalidSchedule("C_M = " + std::to_string(C_M) + " violates Assumption 7: C_M must be > 0");
  }
}

std::size_t schedule_k(std::uint64_t n, double c1) {
  validate_c1(c1);
  if (n < 1) {
    throw InvalidSchedule("schedule_k needs n >= 1");
  }
  const std::uint64_t k = std::max<std::uint64_t>(1, floor_power(n, c1));
  return static_cast<std::size_t>(std::min(k, n));
}

double schedule_b(std::uint64_t n, double c2) {
  validate_c2(c2);
  if (n < 1) {
    throw InvalidSchedule("schedule_b needs n >= 1");
  }
  return std::pow(static_cast<double>(n), -c2);
}

double schedule_M(std::uint64_t n, double C_M) {
  validate_C_M(C_M);
  if (n < 2) {
    throw InvalidSchedule("schedule_M needs n >= 2");
  }
  return C_M * std::sqrt(std::log(static_cast<double>(n)));
}

void EstimatorConfig::validate() const {
  validate_c1(c1);
  validate_c2(c2);
  validate_C_M(C_M);
  if (k_override && *k_override == 0) {
    throw InvalidSchedule("k must be >= 1");
  }
}

std::size_t EstimatorConfig::neighbors_for(std::size_t n) const {
  if (k_override) {
    return *k_override;
  }
  return schedule_k(n, c1);
}

double resolve_radius(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x,
                      std::size_t k) {
  const double radius = index.query(x, k).radius;
  if (radius > 0.0) {
    return radius;
  }
  if (config.degenerate_policy == DegeneratePolicy::error) {
    throw DegenerateRadius(radius);
  }
  const double diameter = index.data().bounding_diameter();
  return 1e-12 * (diameter > 0.0 ? diameter : 1.0);
}

KernelSums kernel_sums(const SampleSet& data, const Kernel& kernel, std::span<const double> x, double bandwidth,
                       SumSelection selection) {
  const std::size_t n = data.size();
  CompensatedSum weight;
  KernelSums sums;
  if (selection == SumSelection::weight_only) {
    for (std::size_t i = 0; i < n; ++i) {
      weight.add(kernel.at_offset(data.row_data(i), x.data(), bandwidth));
    }
    sums.weight = weight.value();
    return sums;
  }
  const auto& y = data.responses();
  CompensatedSum response;
  CompensatedSum positive;
  CompensatedSum negative;
  CompensatedSum magnitude;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = kernel.at_offset(data.row_data(i), x.data(), bandwidth);
    const double term = y[i] * k;
    weight.add(k);
    response.add(term);
    if (y[i] >= 0.0) {
      positive.add(term);
    } else {
      negative.add((-y[i]) * k);
    }
    magnitude.add(std::fabs(term));
  }
  sums.weight = weight.value();
  sums.response = response.value();
  sums.positive = positive.value();
  sums.negative = negative.value();
  sums.abs_response = magnitude.value();
  return sums;
}

double fixed_bandwidth_density(const SampleSet& data, const Kernel& kernel, std::span<const double> x, double inner,
                               double outer) {
  const KernelSums sums = kernel_sums(data, kernel, x, inner, SumSelection::weight_only);
  return sums.weight * normalizer(data.size(), outer, data.dimension());
}

EstimateAtPoint density_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x) {
  check_dimension(index, config, x);
  const std::size_t n = index.size();
  const std::size_t k = config.neighbors_for(n);
  const double radius = resolve_radius(index, config, x, k);
  const KernelSums sums = kernel_sums(index.data(), config.kernel, x, radius, SumSelection::weight_only);
  return EstimateAtPoint{sums.weight * normalizer(n, radius, index.dimension()), radius, k, false};
}

EstimateAtPoint g_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x) {
  check_dimension(index, config, x);
  index.data().responses();
  const std::size_t n = index.size();
  const std::size_t k = config.neighbors_for(n);
  const double radius = resolve_radius(index, config, x, k);
  const KernelSums sums = kernel_sums(index.data(), config.kernel, x, radius, SumSelection::with_responses);
  return EstimateAtPoint{sums.response * normalizer(n, radius, index.dimension()), radius, k, false};
}

SplitEstimate g_split_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x) {
  check_dimension(index, config, x);
  index.data().responses();
  const std::size_t n = index.size();
  const std::size_t k = config.neighbors_for(n);
  const double radius = resolve_radius(index, config, x, k);
  const KernelSums sums = kernel_sums(index.data(), config.kernel, x, radius, SumSelection::with_responses);
  const double scale = normalizer(n, radius, index.dimension());
  return SplitEstimate{sums.positive * scale, sums.negative * scale};
}

EstimateAtPoint regression_at(const NeighborIndex& index, const EstimatorConfig& config, std::span<const double> x,
                              std::uint64_t n) {
  check_dimension(index, config, x);
  index.data().responses();
  const double floor = schedule_b(n, config.c2);
  const std::size_t size = index.size();
  const std::size_t k = config.neighbors_for(size);
  const double radius = resolve_radius(index, config, x, k);
  const KernelSums sums = kernel_sums(index.data(), config.kernel, x, radius, SumSelection::with_responses);
  const double scale = normalizer(size, radius, index.dimension());
  const double f_hat = sums.weight * scale;
  const double g_hat = sums.response * scale;
  const bool floored = !(f_hat > floor);
  return EstimateAtPoint{g_hat / (floored ? floor : f_hat), radius, k, floored};
}

}  // namespace knnlab
