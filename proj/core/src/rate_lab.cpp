#include "knnlab/rate_lab.hpp"

#include "knnlab/csv.hpp"
#include "knnlab/errors.hpp"
#include "knnlab/random.hpp"
#include "knnlab/summation.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace knnlab {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) {
    return sorted.front();
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& values) {
  CompensatedSum sum;
  for (const double v : values) {
    sum.add(v);
  }
  return sum.value() / static_cast<double>(values.size());
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs task(i) for i in [0, count) on up to `threads` workers; rethrows the
// first failure by task index.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        task(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back(worker);
    }
  }
  for (const auto& failure : failures) {
    if (failure) {
      std::rethrow_exception(failure);
    }
  }
}

double evaluate_target(const NeighborIndex& index, const EstimatorConfig& config, StudyTarget target,
                       std::span<const double> x, std::uint64_t n) {
  switch (target) {
    case StudyTarget::density:
      return density_at(index, config, x).value;
    case StudyTarget::g:
      return g_at(index, config, x).value;
    case StudyTarget::regression:
      return regression_at(index, config, x, n).value;
  }
  throw InvalidTarget("unknown study target");
}

constexpr std::size_t kMaxAttemptsPerTrial = 1u << 12;

}  // namespace

StudyTarget parse_study_target(std::string_view text) {
  if (text == "density") {
    return StudyTarget::density;
  }
  if (text == "g") {
    return StudyTarget::g;
  }
  if (text == "regression") {
    return StudyTarget::regression;
  }
  throw InvalidTarget("unknown target '" + std::string(text) + "' (expected density, g or regression)");
}

std::string_view to_string(StudyTarget target) noexcept {
  switch (target) {
    case StudyTarget::density:
      return "density";
    case StudyTarget::g:
      return "g";
    case StudyTarget::regression:
      return "regression";
  }
  return "unknown";
}

ModelTarget model_target(StudyTarget target) noexcept {
  switch (target) {
    case StudyTarget::density:
      return ModelTarget::density;
    case StudyTarget::g:
      return ModelTarget::g;
    case StudyTarget::regression:
      return ModelTarget::regression;
  }
  return ModelTarget::density;
}

double sup_error(std::span<const double> estimates, std::span<const double> truths) {
  if (estimates.size() != truths.size()) {
    throw DimensionMismatch("sup_error: " + std::to_string(estimates.size()) + " estimates vs " +
                            std::to_string(truths.size()) + " truths");
  }
  if (estimates.empty()) {
    throw PreconditionFailed("sup_error needs at least one grid value");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    worst = std::max(worst, std::fabs(estimates[i] - truths[i]));
  }
  return worst;
}

double theory_rate(std::uint64_t n, std::size_t k, std::size_t p, int r, double M_n, double b_n,
                   StudyTarget target) {
  if (n < 2) {
    throw PreconditionFailed("theory_rate needs n >= 2");
  }
  if (k < 1 || k > n) {
    throw PreconditionFailed("theory_rate needs 1 <= k <= n");
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double bias = std::pow(kd / nd, (r + 1.0) / static_cast<double>(p));
  const double log_term = nd * std::log(nd) / (kd * kd);
  switch (target) {
    case StudyTarget::density:
      return bias + std::sqrt(log_term);
    case StudyTarget::g:
      return bias + std::sqrt(log_term * M_n * M_n);
    case StudyTarget::regression:
      return bias + std::sqrt(log_term * M_n * M_n) + b_n;
  }
  throw InvalidTarget("unknown study target");
}

LogLogFit fit_log_log(std::span<const double> rates, std::span<const double> errors) {
  if (rates.size() != errors.size()) {
    throw DimensionMismatch("fit_log_log: rates and errors differ in length");
  }
  if (rates.size() < 2) {
    throw PreconditionFailed("fit_log_log needs at least two points");
  }
  const auto m = static_cast<double>(rates.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    mean_x += std::log(rates[i]);
    mean_y += std::log(errors[i]);
  }
  mean_x /= m;
  mean_y /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double dx = std::log(rates[i]) - mean_x;
    sxy += dx * (std::log(errors[i]) - mean_y);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) {
    throw PreconditionFailed("fit_log_log: theory rates are all equal");
  }
  const double slope = sxy / sxx;
  return LogLogFit{slope, mean_y - slope * mean_x};
}

std::vector<std::uint64_t> geometric_sizes(std::uint64_t n_min, std::uint64_t n_max, std::size_t count) {
  if (n_min < 2 || n_max <= n_min || count < 2) {
    throw PreconditionFailed("geometric_sizes needs 2 <= n_min < n_max and count >= 2");
  }
  std::vector<std::uint64_t> sizes;
  const double ratio = std::log(static_cast<double>(n_max) / static_cast<double>(n_min)) /
                       static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(n_min) * std::exp(ratio * static_cast<double>(i))));
    if (!sizes.empty() && n <= sizes.back()) {
      throw PreconditionFailed("geometric_sizes: too many points for the range");
    }
    sizes.push_back(n);
  }
  sizes.back() = n_max;
  return sizes;
}

PointGrid box_lattice(const Cube& box, std::size_t dimension, std::size_t per_axis) {
  if (per_axis < 1 || dimension < 1) {
    throw PreconditionFailed("lattice needs at least one point per axis");
  }
  PointGrid grid;
  grid.dimension = dimension;
  std::vector<std::size_t> digit(dimension, 0);
  while (true) {
    for (std::size_t j = 0; j < dimension; ++j) {
      const double t = per_axis == 1 ? 0.5 : static_cast<double>(digit[j]) / static_cast<double>(per_axis - 1);
      grid.coordinates.push_back(box.lower + t * box.side());
    }
    std::size_t j = dimension;
    while (true) {
      if (j == 0) {
        return grid;
      }
      --j;
      if (++digit[j] < per_axis) {
        break;
      }
      digit[j] = 0;
    }
  }
}

PointGrid study_grid(const SyntheticModel& model, std::uint64_t n, std::size_t k, std::size_t points) {
  const std::size_t p = model.dimension();
  const Cube& box = model.evaluation_box();
  const double inset = 3.0 * std::pow(static_cast<double>(k) / (static_cast<double>(n) * model.density_floor()),
                                      1.0 / static_cast<double>(p));
  const Cube inner{box.lower + inset, box.upper - inset};
  if (!(inner.upper > inner.lower)) {
    throw PreconditionFailed("evaluation grid is empty after the boundary inset of " + std::to_string(inset) +
                             " at n = " + std::to_string(n));
  }
  if (p <= 2) {
    return box_lattice(inner, p, points == 0 ? 200 : points);
  }
  const std::size_t count = points == 0 ? 10'000 : points;
  boost::random::sobol engine(static_cast<unsigned>(p));
  const double span = static_cast<double>(engine.max()) - static_cast<double>(engine.min()) + 1.0;
  PointGrid grid;
  grid.dimension = p;
  grid.coordinates.reserve(count * p);
  for (std::size_t i = 0; i < count * p; ++i) {
    const double u = (static_cast<double>(engine() - engine.min()) + 0.5) / span;
    grid.coordinates.push_back(inner.lower + u * inner.side());
  }
  return grid;
}

void RateStudyConfig::validate() const {
  estimator.validate();
  if (n_grid.size() < 4) {
    throw PreconditionFailed("n_grid needs at least 4 sizes");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw PreconditionFailed("n_grid must be strictly increasing with n >= 2");
    }
  }
  if (trials < 10) {
    throw PreconditionFailed("trials must be >= 10");
  }
  if (static_cast<std::size_t>(estimator.kernel.dimension()) != model.dimension()) {
    throw DimensionMismatch("kernel dimension differs from model dimension");
  }
}

KernelCertification certify_kernel(const Kernel& kernel) {
  KernelCertification cert;
  cert.declared_order = kernel.order();
  const int p = kernel.dimension();
  const MomentReport moments =
      p <= 3 ? check_moments(kernel, 1e-6, IntegrationMethod::tensor_quadrature,
                             p == 3 ? std::size_t{32 * 32 * 32} : std::size_t{0})
             : check_moments(kernel, 1e-6, IntegrationMethod::monte_carlo, 200'000);
  cert.verified_order = moments.verified_order;
  cert.radially_monotone = check_radial_monotone(kernel, default_monotone_grid(p), 64).holds;
  return cert;
}

RateStudyResult run_rate_study(const RateStudyConfig& config) {
  config.validate();
  const SyntheticModel& model = config.model;
  const EstimatorConfig& estimator = config.estimator;
  const std::size_t p = model.dimension();
  const int r = std::min(estimator.kernel.order(), model.smoothness());
  const ModelTarget truth_target = model_target(config.target);
  const unsigned threads = resolve_threads(config.threads);

  RateStudyResult result;
  result.rate_order = r;
  result.kernel = certify_kernel(estimator.kernel);
  result.theory_exponent_bias = -(1.0 - estimator.c1) * (r + 1.0) / static_cast<double>(p);
  result.theory_exponent_variance = 0.5 - estimator.c1;

  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const std::uint64_t n = config.n_grid[ni];
    PerNResult row;
    row.n = n;
    row.k_n = estimator.neighbors_for(static_cast<std::size_t>(n));
    row.b_n = schedule_b(n, estimator.c2);
    row.M_n = schedule_M(n, estimator.C_M);
    row.theory_rate = theory_rate(n, row.k_n, p, r, row.M_n, row.b_n, config.target);

    const PointGrid grid = study_grid(model, n, row.k_n, config.grid_points);
    row.grid_size = grid.size();
    std::vector<double> truths(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      truths[g] = model.truth(truth_target, grid.point(g));
    }

    std::vector<double> errors(config.trials);
    std::vector<std::size_t> clips(config.trials);
    std::vector<std::size_t> degenerate(config.trials);
    parallel_for(config.trials, threads, [&](std::size_t trial) {
      std::vector<double> estimates(grid.size());
      for (std::size_t attempt = 0; attempt < kMaxAttemptsPerTrial; ++attempt) {
        const std::uint64_t stream = (static_cast<std::uint64_t>(ni) << 48) |
                                     (static_cast<std::uint64_t>(trial) << 16) | attempt;
        const TrialSample drawn = model.sample(static_cast<std::size_t>(n), config.seed, estimator.C_M, stream);
        const NeighborIndex index(drawn.sample, config.leaf_size);
        try {
          for (std::size_t g = 0; g < grid.size(); ++g) {
            estimates[g] = evaluate_target(index, estimator, config.target, grid.point(g), n);
          }
        } catch (const DegenerateRadius&) {
          ++degenerate[trial];
          continue;
        }
        errors[trial] = sup_error(estimates, truths);
        clips[trial] = drawn.clip_count;
        return;
      }
      throw StudyAborted("trial " + std::to_string(trial) + " kept producing degenerate radii");
    });

    std::size_t degenerate_total = 0;
    std::size_t clip_total = 0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      degenerate_total += degenerate[t];
      clip_total += clips[t];
    }
    if (10 * degenerate_total > config.trials) {
      throw StudyAborted(std::to_string(degenerate_total) + " degenerate trials at n = " + std::to_string(n) +
                         " exceed 10% of " + std::to_string(config.trials));
    }
    row.degenerate_resamples = degenerate_total;
    row.clip_rate = static_cast<double>(clip_total) / (static_cast<double>(config.trials) * static_cast<double>(n));
    row.mean_sup_error = mean_of(errors);
    std::sort(errors.begin(), errors.end());
    row.median = quantile_sorted(errors, 0.5);
    row.q10 = quantile_sorted(errors, 0.1);
    row.q90 = quantile_sorted(errors, 0.9);
    result.per_n.push_back(row);
  }

  std::vector<double> rates;
  std::vector<double> means;
  for (const auto& row : result.per_n) {
    rates.push_back(row.theory_rate);
    means.push_back(row.mean_sup_error);
  }
  const LogLogFit fit = fit_log_log(rates, means);
  result.fitted_slope = fit.slope;
  result.fitted_intercept = fit.intercept;
  return result;
}

std::string per_n_csv(const RateStudyResult& result) {
  std::string out = "n,k_n,b_n,M_n,mean_sup_error,median,q10,q90,clip_rate,theory_rate\n";
  for (const auto& row : result.per_n) {
    out += std::to_string(row.n) + "," + std::to_string(row.k_n) + "," + format_double(row.b_n) + "," +
           format_double(row.M_n) + "," + format_double(row.mean_sup_error) + "," + format_double(row.median) + "," +
           format_double(row.q10) + "," + format_double(row.q90) + "," + format_double(row.clip_rate) + "," +
           format_double(row.theory_rate) + "\n";
  }
  return out;
}

std::string summary_csv(const RateStudyResult& result) {
  return "fitted_slope,fitted_intercept,theory_exponent_bias,theory_exponent_variance\n" +
         format_double(result.fitted_slope) + "," + format_double(result.fitted_intercept) + "," +
         format_double(result.theory_exponent_bias) + "," + format_double(result.theory_exponent_variance) + "\n";
}

// ---------------------------------------------------------------------------

double BetaRule::evaluate(std::uint64_t n, int r, std::size_t p) const {
  if (kind == Kind::fixed) {
    if (!(value > 0.0 && value <= 1.0)) {
      throw PreconditionFailed("fixed beta must lie in (0, 1]");
    }
    return value;
  }
  return 1.0 - std::pow(static_cast<double>(n), -(r + 1.0) / static_cast<double>(p));
}

SandwichRadii sandwich_radii(std::size_t k, std::uint64_t n, double density, std::size_t p, double beta) {
  if (!(density > 0.0)) {
    throw PreconditionFailed("sandwich radii need a positive density");
  }
  const double pd = static_cast<double>(p);
  const double base = std::pow(static_cast<double>(k) / (static_cast<double>(n) * density), 1.0 / pd);
  return SandwichRadii{base * std::pow(beta, 1.0 / (2.0 * pd)), base * std::pow(beta, -1.0 / (2.0 * pd))};
}

SandwichReport sandwich_diagnostic(const SyntheticModel& model, const SampleSet& sample,
                                   const EstimatorConfig& config, const PointGrid& eval_grid,
                                   const BetaRule& beta_rule) {
  const Kernel& kernel = config.kernel;
  const std::size_t p = sample.dimension();
  if (model.dimension() != p || static_cast<std::size_t>(kernel.dimension()) != p || eval_grid.dimension != p) {
    throw DimensionMismatch("sandwich diagnostic: model, sample, kernel and grid dimensions differ");
  }
  if (!check_radial_monotone(kernel, default_monotone_grid(kernel.dimension()), 64).holds) {
    throw PreconditionFailed("sandwich diagnostic requires a radially monotone kernel");
  }
  const NeighborIndex index(sample);
  const std::uint64_t n = sample.size();
  SandwichReport report;
  report.k = config.neighbors_for(sample.size());
  report.beta = beta_rule.evaluate(n, kernel.order(), p);
  const double eps = std::numeric_limits<double>::epsilon();

  std::size_t contained = 0;
  std::size_t ordered = 0;
  for (std::size_t g = 0; g < eval_grid.size(); ++g) {
    const auto x = eval_grid.point(g);
    SandwichPoint point;
    point.x.assign(x.begin(), x.end());
    const SandwichRadii radii = sandwich_radii(report.k, n, model.true_density(x), p, report.beta);
    point.D_minus = radii.minus;
    point.D_plus = radii.plus;
    const EstimateAtPoint estimate = density_at(index, config, x);
    point.R_n = estimate.radius_used;
    point.f_hat = estimate.value;
    point.f1 = fixed_bandwidth_density(sample, kernel, x, radii.minus, radii.plus);
    point.f2 = fixed_bandwidth_density(sample, kernel, x, radii.plus, radii.minus);
    point.contained = radii.minus <= point.R_n && point.R_n <= radii.plus;
    if (point.contained) {
      ++contained;
      const double slack = 4.0 * eps * std::max({std::fabs(point.f1), std::fabs(point.f_hat), std::fabs(point.f2)});
      const bool ok = point.f1 <= point.f_hat + slack && point.f_hat <= point.f2 + slack;
      point.ordered_given_containment = ok;
      if (ok) {
        ++ordered;
      } else {
        ++report.order_violations;
      }
    }
    report.per_point.push_back(std::move(point));
  }
  report.containment_rate = static_cast<double>(contained) / static_cast<double>(eval_grid.size());
  report.conditional_order_rate = contained == 0 ? std::numeric_limits<double>::quiet_NaN()
                                                 : static_cast<double>(ordered) / static_cast<double>(contained);
  return report;
}

std::string sandwich_csv(const SandwichReport& report) {
  std::string out;
  if (report.per_point.empty()) {
    return "D_minus,D_plus,R_n,contained,f1,f_hat,f2,ordered\n";
  }
  const std::size_t p = report.per_point.front().x.size();
  for (std::size_t j = 0; j < p; ++j) {
    out += "x" + std::to_string(j + 1) + ",";
  }
  out += "D_minus,D_plus,R_n,contained,f1,f_hat,f2,ordered\n";
  for (const auto& point : report.per_point) {
    for (const double v : point.x) {
      out += format_double(v) + ",";
    }
    out += format_double(point.D_minus) + "," + format_double(point.D_plus) + "," + format_double(point.R_n) + "," +
           (point.contained ? "1" : "0") + "," + format_double(point.f1) + "," + format_double(point.f_hat) + "," +
           format_double(point.f2) + "," +
           (point.ordered_given_containment ? (*point.ordered_given_containment ? "1" : "0") : "") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

BiasOracleResult bias_oracle(const SyntheticModel& model, const Kernel& kernel, double D1, double D2,
                             std::span<const double> x, std::size_t budget, ModelTarget target) {
  const std::size_t p = model.dimension();
  if (static_cast<std::size_t>(kernel.dimension()) != p || x.size() != p) {
    throw DimensionMismatch("bias oracle: model, kernel and point dimensions differ");
  }
  if (p > 2) {
    throw PreconditionFailed("bias oracle quadrature is limited to p <= 2");
  }
  if (!(D1 > 0.0) || !(D2 > 0.0)) {
    throw PreconditionFailed("bias oracle bandwidths must be positive");
  }
  if (budget == 0) {
    budget = p == 1 ? 128 : 128 * 128;
  }
  BiasOracleResult result;
  result.truth = model.truth(target, x);
  const Cube& box = model.evaluation_box();
  const double margin = 6.0 * D2 * kernel.profile_width();
  for (const double v : x) {
    if (v - box.lower < margin || box.upper - v < margin) {
      result.boundary_warning = true;
    }
  }
  const KernelQuadrature rule = kernel_quadrature(kernel, budget);
  std::vector<double> shifted(p);
  CompensatedSum integral;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto u = rule.node(i);
    for (std::size_t j = 0; j < p; ++j) {
      shifted[j] = x[j] + D2 * u[j];
    }
    integral.add(rule.weights[i] * model.truth_anywhere(target, shifted));
  }
  const double gamma = std::pow(D2 / D1, static_cast<double>(p));
  result.expected_value = gamma * integral.value();
  result.bias_abs = std::fabs(result.expected_value - result.truth);
  return result;
}

}  // namespace knnlab
