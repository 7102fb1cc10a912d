#pragma once

#include "knnlab/estimators.hpp"
#include "knnlab/sample_set.hpp"
#include "knnlab/synthetic_models.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace knnlab {

enum class StudyTarget { density, g, regression };

StudyTarget parse_study_target(std::string_view text);
std::string_view to_string(StudyTarget target) noexcept;
ModelTarget model_target(StudyTarget target) noexcept;

/// max_i |estimates_i - truths_i|.
double sup_error(std::span<const double> estimates, std::span<const double> truths);

/// density:    (k/n)^((r+1)/p) + sqrt(n ln n / k^2)
/// g:          (k/n)^((r+1)/p) + sqrt(n ln n M_n^2 / k^2)
/// regression: g rate + b_n
double theory_rate(std::uint64_t n, std::size_t k, std::size_t p, int r, double M_n, double b_n, StudyTarget target);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least squares fit of log(errors) = slope * log(rates) + intercept.
LogLogFit fit_log_log(std::span<const double> rates, std::span<const double> errors);

/// Roughly geometric, strictly increasing integer sizes from n_min to n_max.
std::vector<std::uint64_t> geometric_sizes(std::uint64_t n_min, std::uint64_t n_max, std::size_t count);

/// Evaluation points for the sup approximation: a lattice of `points` per
/// axis (p <= 2) or `points` Sobol points (p >= 3) in the evaluation box,
/// inset from its boundary by 3 (k / (n c0))^(1/p).
PointGrid study_grid(const SyntheticModel& model, std::uint64_t n, std::size_t k, std::size_t points);

/// Lattice of `per_axis` points per axis over the whole evaluation box.
PointGrid box_lattice(const Cube& box, std::size_t dimension, std::size_t per_axis);

struct RateStudyConfig {
  explicit RateStudyConfig(SyntheticModel m) : model(std::move(m)) {}

  SyntheticModel model;
  EstimatorConfig estimator;
  StudyTarget target = StudyTarget::density;
  std::vector<std::uint64_t> n_grid;
  std::size_t trials = 10;
  /// Lattice points per axis (p <= 2) or Sobol points (p >= 3); 0 = default
  /// (200 per axis, 10^4 Sobol points).
  std::size_t grid_points = 0;
  std::uint64_t seed = 1;
  /// Worker threads; 0 = available parallelism. Results do not depend on it.
  unsigned threads = 0;
  std::size_t leaf_size = NeighborIndex::kDefaultLeafSize;

  /// Throws PreconditionFailed / InvalidSchedule on invalid settings.
  void validate() const;
};

struct PerNResult {
  std::uint64_t n = 0;
  std::size_t k_n = 0;
  double b_n = 0.0;
  double M_n = 0.0;
  double mean_sup_error = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double clip_rate = 0.0;
  double theory_rate = 0.0;
  std::size_t degenerate_resamples = 0;
  std::size_t grid_size = 0;
};

struct KernelCertification {
  int declared_order = 0;
  int verified_order = 0;
  bool radially_monotone = false;
};

struct RateStudyResult {
  std::vector<PerNResult> per_n;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  /// Exponent of n in the bias term, -(1 - c1)(r + 1)/p.
  double theory_exponent_bias = 0.0;
  /// Exponent of n in the stochastic term without logarithms, 1/2 - c1.
  double theory_exponent_variance = 0.0;
  int rate_order = 0;
  KernelCertification kernel;
};

/// Seeded Monte Carlo scaling study. Deterministic in the config; the
/// thread count does not affect any output bit.
RateStudyResult run_rate_study(const RateStudyConfig& config);

/// per_n.csv: n,k_n,b_n,M_n,mean_sup_error,median,q10,q90,clip_rate,theory_rate
std::string per_n_csv(const RateStudyResult& result);
/// summary.csv: fitted_slope,fitted_intercept,theory_exponent_bias,theory_exponent_variance
std::string summary_csv(const RateStudyResult& result);

KernelCertification certify_kernel(const Kernel& kernel);

// ---------------------------------------------------------------------------
// Sandwich diagnostic

/// beta_n used to build D_n^-(x) and D_n^+(x).
struct BetaRule {
  enum class Kind { canonical, fixed };
  Kind kind = Kind::canonical;
  double value = 0.0;

  /// canonical: 1 - n^(-(r+1)/p); fixed: `value`.
  double evaluate(std::uint64_t n, int r, std::size_t p) const;
};

/// D^-(x) = (k/(n f))^(1/p) beta^(1/(2p)),  D^+(x) = (k/(n f))^(1/p) beta^(-1/(2p)).
struct SandwichRadii {
  double minus = 0.0;
  double plus = 0.0;
};
SandwichRadii sandwich_radii(std::size_t k, std::uint64_t n, double density, std::size_t p, double beta);

struct SandwichPoint {
  std::vector<double> x;
  double D_minus = 0.0;
  double D_plus = 0.0;
  double R_n = 0.0;
  bool contained = false;
  double f1 = 0.0;
  double f_hat = 0.0;
  double f2 = 0.0;
  /// f1 <= f_hat <= f2; only evaluated where `contained` holds.
  std::optional<bool> ordered_given_containment;
};

struct SandwichReport {
  std::vector<SandwichPoint> per_point;
  double beta = 0.0;
  std::size_t k = 0;
  double containment_rate = 0.0;
  /// Fraction of contained points that are ordered; NaN when none is contained.
  double conditional_order_rate = 0.0;
  std::size_t order_violations = 0;
};

/// Brackets the random-bandwidth estimator between the two fixed-bandwidth
/// estimators f1 (D^+ outside, D^- inside the kernel) and f2 (swapped).
/// Throws PreconditionFailed if the kernel is not radially monotone.
SandwichReport sandwich_diagnostic(const SyntheticModel& model, const SampleSet& sample,
                                   const EstimatorConfig& config, const PointGrid& eval_grid,
                                   const BetaRule& beta_rule);

/// CSV: x1..xp,D_minus,D_plus,R_n,contained,f1,f_hat,f2,ordered
std::string sandwich_csv(const SandwichReport& report);

// ---------------------------------------------------------------------------
// Bias oracle

struct BiasOracleResult {
  double expected_value = 0.0;
  double truth = 0.0;
  double bias_abs = 0.0;
  /// Set when x is closer than 6 D2 (profile widths) to the box boundary.
  bool boundary_warning = false;
};

/// E[phi_hat(x)] = (D2/D1)^p * integral K(u) phi(x + D2 u) du by kernel
/// quadrature, where phi is the model truth for `target`.
BiasOracleResult bias_oracle(const SyntheticModel& model, const Kernel& kernel, double D1, double D2,
                             std::span<const double> x, std::size_t budget = 0,
                             ModelTarget target = ModelTarget::density);

}  // namespace knnlab
