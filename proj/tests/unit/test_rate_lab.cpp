#include "knnlab/errors.hpp"
#include "knnlab/random.hpp"
#include "knnlab/rate_lab.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace knnlab;

namespace {

RateStudyConfig small_study(const char* model, StudyTarget target, std::uint64_t seed) {
  RateStudyConfig config(make_model(model));
  config.target = target;
  config.n_grid = {2048, 4096, 8192, 16384};
  config.trials = 10;
  config.grid_points = 50;
  config.seed = seed;
  return config;
}

}  // namespace

TEST(SupError, Examples) {
  const std::vector<double> truth{1.0, 2.0, 3.0};
  EXPECT_EQ(sup_error(truth, truth), 0.0);
  EXPECT_NEAR(sup_error(std::vector<double>{1.3, 2.3, 3.3}, truth), 0.3, 1e-15);
  EXPECT_EQ(sup_error(std::vector<double>{0.1, -0.4, 0.2}, std::vector<double>{0, 0, 0}), 0.4);
  EXPECT_THROW(sup_error(std::vector<double>{1.0}, truth), DimensionMismatch);
}

TEST(TheoryRate, Examples) {
  EXPECT_NEAR(theory_rate(65536, 2352, 1, 1, 1.0, 0.0, StudyTarget::density),
              0.363760752647132752114961988254, 1e-15);
  const double n = 4096.0;
  EXPECT_NEAR(theory_rate(4096, 4096, 2, 1, 1.0, 0.0, StudyTarget::density), 1.0 + std::sqrt(std::log(n) / n),
              1e-15);
  EXPECT_EQ(theory_rate(5000, 300, 2, 3, 1.0, 0.1, StudyTarget::g),
            theory_rate(5000, 300, 2, 3, 1.0, 0.1, StudyTarget::density));
  EXPECT_NEAR(theory_rate(5000, 300, 2, 3, 2.0, 0.1, StudyTarget::regression) -
                  theory_rate(5000, 300, 2, 3, 2.0, 0.1, StudyTarget::g),
              0.1, 1e-15);
  EXPECT_THROW(theory_rate(1, 1, 1, 1, 1.0, 0.0, StudyTarget::density), PreconditionFailed);
  EXPECT_THROW(theory_rate(10, 11, 1, 1, 1.0, 0.0, StudyTarget::density), PreconditionFailed);
}

TEST(StudyTarget, Parsing) {
  EXPECT_EQ(parse_study_target("regression"), StudyTarget::regression);
  EXPECT_EQ(to_string(StudyTarget::g), "g");
  EXPECT_THROW(parse_study_target("mode"), InvalidTarget);
}

TEST(FitLogLog, ExactCases) {
  const std::vector<double> rates{0.5, 0.3, 0.2, 0.1};
  std::vector<double> errors;
  for (const double r : rates) {
    errors.push_back(3.0 * r);
  }
  LogLogFit fit = fit_log_log(rates, errors);
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);

  fit = fit_log_log(rates, std::vector<double>(4, 0.7));
  EXPECT_NEAR(fit.slope, 0.0, 1e-12);
  EXPECT_THROW(fit_log_log(std::vector<double>{0.1}, std::vector<double>{0.1}), PreconditionFailed);
  EXPECT_THROW(fit_log_log(rates, std::vector<double>{0.1}), DimensionMismatch);
}

TEST(FitLogLog, NoisySynthesizedErrors) {
  CounterStream rng(4, 0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> rates;
    std::vector<double> errors;
    for (int e = 8; e <= 24; ++e) {
      const std::uint64_t n = 1ull << e;
      const std::size_t k = schedule_k(n, 0.7);
      const double rate = theory_rate(n, k, 1, 1, 1.0, 0.0, StudyTarget::density);
      rates.push_back(rate);
      errors.push_back(0.2 * rate * (1.0 + 0.02 * (rng.uniform() - 0.5)));
    }
    const double slope = fit_log_log(rates, errors).slope;
    EXPECT_GE(slope, 0.98);
    EXPECT_LE(slope, 1.02);
  }
}

TEST(Grids, GeometricSizes) {
  const auto sizes = geometric_sizes(1024, 65536, 7);
  EXPECT_EQ(sizes, (std::vector<std::uint64_t>{1024, 2048, 4096, 8192, 16384, 32768, 65536}));
  EXPECT_THROW(geometric_sizes(10, 12, 10), PreconditionFailed);
  EXPECT_THROW(geometric_sizes(100, 50, 4), PreconditionFailed);
}

TEST(Grids, StudyGridInsetsFromBoundary) {
  const SyntheticModel m3 = make_model("M3");
  const PointGrid grid = study_grid(m3, 1024, 128, 0);
  EXPECT_EQ(grid.size(), 200u);
  const double inset = 3.0 * 128.0 / 1024.0;
  EXPECT_NEAR(grid.point(0)[0], inset, 1e-15);
  EXPECT_NEAR(grid.point(199)[0], 1.0 - inset, 1e-15);

  ModelOverrides o;
  o.dimension = 3;
  const PointGrid sobol = study_grid(make_model("M3", o), 100000, 30, 0);
  EXPECT_EQ(sobol.size(), 10000u);
  for (const double v : sobol.coordinates) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  EXPECT_THROW(study_grid(make_model("M2"), 10000, 630, 10), PreconditionFailed);
}

TEST(Sandwich, RadiiExamples) {
  const SandwichRadii r = sandwich_radii(100, 10000, 1.0, 1, 0.99);
  EXPECT_NEAR(r.minus, 0.00994987437106619954734479821001, 1e-17);
  EXPECT_NEAR(r.plus, 0.0100503781525921207548937355657, 1e-17);
  const SandwichRadii same = sandwich_radii(50, 800, 0.5, 2, 1.0);
  EXPECT_EQ(same.minus, same.plus);
  EXPECT_NEAR(same.minus, std::sqrt(50.0 / 400.0), 1e-15);
}

TEST(Sandwich, CanonicalBeta) {
  BetaRule rule;
  EXPECT_NEAR(rule.evaluate(10000, 1, 1), 1.0 - 1e-8, 1e-20);
  rule.kind = BetaRule::Kind::fixed;
  rule.value = 0.5;
  EXPECT_EQ(rule.evaluate(10000, 1, 1), 0.5);
  rule.value = 1.5;
  EXPECT_THROW(rule.evaluate(10, 1, 1), PreconditionFailed);
}

TEST(Sandwich, OrderingHoldsWheneverContained) {
  // A wide band guarantees contained points, where the ordering is exact.
  const SyntheticModel m2 = make_model("M2");
  EstimatorConfig config;
  const TrialSample drawn = m2.sample(10000, 1, config.C_M);
  const PointGrid grid = box_lattice(m2.evaluation_box(), 1, 200);
  BetaRule wide;
  wide.kind = BetaRule::Kind::fixed;
  wide.value = 0.01;
  const SandwichReport report = sandwich_diagnostic(m2, drawn.sample, config, grid, wide);
  EXPECT_EQ(report.k, 630u);
  EXPECT_GT(report.containment_rate, 0.5);
  EXPECT_EQ(report.order_violations, 0u);
  EXPECT_EQ(report.conditional_order_rate, 1.0);
  for (const auto& pt : report.per_point) {
    EXPECT_EQ(pt.ordered_given_containment.has_value(), pt.contained);
    if (pt.contained) {
      EXPECT_LE(pt.f1, pt.f_hat);
      EXPECT_LE(pt.f_hat, pt.f2);
    }
  }
  const std::string csv = sandwich_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,D_minus,D_plus,R_n,contained,f1,f_hat,f2,ordered");
}

TEST(Sandwich, RequiresMonotoneKernel) {
  const SyntheticModel m2 = make_model("M2");
  EstimatorConfig config;
  config.kernel = make_kernel(parse_kernel_spec("poly_gaussian_order_r:p=1:r=3"));
  const TrialSample drawn = m2.sample(1000, 1, config.C_M);
  EXPECT_THROW(sandwich_diagnostic(m2, drawn.sample, config, box_lattice(m2.evaluation_box(), 1, 10), BetaRule{}),
               PreconditionFailed);
}

TEST(BiasOracle, ConstantTruthIsExact) {
  const SyntheticModel m3 = make_model("M3");
  const Kernel k = make_kernel(KernelSpec{});
  const BiasOracleResult r = bias_oracle(m3, k, 0.02, 0.02, std::vector<double>{0.5});
  EXPECT_NEAR(r.expected_value, 1.0, 1e-12);
  EXPECT_FALSE(r.boundary_warning);
}

TEST(BiasOracle, VanishingBandwidth) {
  const SyntheticModel m1 = make_model("M1");
  const Kernel k = make_kernel(KernelSpec{});
  const BiasOracleResult r = bias_oracle(m1, k, 1e-4, 1e-4, std::vector<double>{0.3}, 0, ModelTarget::g);
  EXPECT_LT(r.bias_abs, 1e-5);
}

TEST(BiasOracle, BiasOrder) {
  const SyntheticModel m1 = make_model("M1");
  const std::vector<double> x{0.25};
  const Kernel gauss = make_kernel(KernelSpec{});
  const double ratio2 = bias_oracle(m1, gauss, 0.04, 0.04, x, 0, ModelTarget::g).bias_abs /
                        bias_oracle(m1, gauss, 0.02, 0.02, x, 0, ModelTarget::g).bias_abs;
  EXPECT_GE(ratio2, 4.0 / 1.5);
  EXPECT_LE(ratio2, 4.0 * 1.5);
  const Kernel poly = make_kernel(parse_kernel_spec("poly_gaussian_order_r:p=1:r=3"));
  const double ratio4 = bias_oracle(m1, poly, 0.04, 0.04, x, 0, ModelTarget::g).bias_abs /
                        bias_oracle(m1, poly, 0.02, 0.02, x, 0, ModelTarget::g).bias_abs;
  EXPECT_GE(ratio4, 16.0 / 1.5);
  EXPECT_LE(ratio4, 16.0 * 1.5);
}

TEST(BiasOracle, TwoDimensionsAndGamma) {
  ModelOverrides o;
  o.dimension = 2;
  const SyntheticModel m3 = make_model("M3", o);
  const Kernel k = make_kernel(parse_kernel_spec("gaussian_product:p=2:r=1"));
  const BiasOracleResult r = bias_oracle(m3, k, 0.01, 0.02, std::vector<double>{0.5, 0.5});
  EXPECT_NEAR(r.expected_value, 4.0, 1e-10);
}

TEST(BiasOracle, BoundaryWarningAndPreconditions) {
  const SyntheticModel m1 = make_model("M1");
  const Kernel k = make_kernel(KernelSpec{});
  EXPECT_TRUE(bias_oracle(m1, k, 0.05, 0.05, std::vector<double>{0.1}).boundary_warning);
  EXPECT_THROW(bias_oracle(m1, k, 0.0, 0.05, std::vector<double>{0.5}), PreconditionFailed);
  ModelOverrides o;
  o.dimension = 3;
  EXPECT_THROW(bias_oracle(make_model("M1", o), make_kernel(parse_kernel_spec("gaussian_product:p=3:r=1")), 0.1,
                           0.1, std::vector<double>{0.5, 0.5, 0.5}),
               PreconditionFailed);
}

TEST(RateStudy, ConfigValidation) {
  RateStudyConfig config = small_study("M3", StudyTarget::density, 1);
  config.trials = 5;
  EXPECT_THROW(run_rate_study(config), PreconditionFailed);
  config = small_study("M3", StudyTarget::density, 1);
  config.n_grid = {256, 512, 1024};
  EXPECT_THROW(run_rate_study(config), PreconditionFailed);
  config.n_grid = {256, 512, 512, 1024};
  EXPECT_THROW(run_rate_study(config), PreconditionFailed);
  config = small_study("M3", StudyTarget::density, 1);
  config.estimator.c1 = 0.3;
  EXPECT_THROW(run_rate_study(config), InvalidSchedule);
}

TEST(RateStudy, DensityErrorsPositiveAndDecreasing) {
  const RateStudyResult result = run_rate_study(small_study("M3", StudyTarget::density, 1));
  ASSERT_EQ(result.per_n.size(), 4u);
  for (const auto& row : result.per_n) {
    EXPECT_GT(row.mean_sup_error, 0.0);
    EXPECT_LE(row.q10, row.median);
    EXPECT_LE(row.median, row.q90);
    EXPECT_EQ(row.grid_size, 50u);
    EXPECT_EQ(row.clip_rate, 0.0);
  }
  EXPECT_GT(result.per_n.front().mean_sup_error, result.per_n.back().mean_sup_error);
  EXPECT_EQ(result.kernel.verified_order, 1);
  EXPECT_TRUE(result.kernel.radially_monotone);
  EXPECT_NEAR(result.theory_exponent_bias, -0.6, 1e-12);
  EXPECT_NEAR(result.theory_exponent_variance, -0.2, 1e-12);
}

TEST(RateStudy, DeterministicAcrossRunsAndThreadCounts) {
  RateStudyConfig config = small_study("M1", StudyTarget::regression, 11);
  config.threads = 1;
  const std::string one = per_n_csv(run_rate_study(config));
  config.threads = 3;
  const RateStudyResult three = run_rate_study(config);
  EXPECT_EQ(per_n_csv(three), one);
  EXPECT_EQ(per_n_csv(run_rate_study(config)), one);
  EXPECT_EQ(summary_csv(three), summary_csv(run_rate_study(config)));
}

TEST(RateStudy, CsvLayout) {
  const RateStudyResult result = run_rate_study(small_study("M1", StudyTarget::g, 2));
  const std::string per_n = per_n_csv(result);
  EXPECT_EQ(per_n.substr(0, per_n.find('\n')), "n,k_n,b_n,M_n,mean_sup_error,median,q10,q90,clip_rate,theory_rate");
  const std::string summary = summary_csv(result);
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "fitted_slope,fitted_intercept,theory_exponent_bias,theory_exponent_variance");
}

TEST(RateStudy, DefaultDensityStudyDecaysMonotonically) {
  int monotone = 0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    RateStudyConfig config(make_model("M3"));
    config.n_grid = geometric_sizes(1024, 65536, 7);
    config.trials = 50;
    config.seed = static_cast<std::uint64_t>(seed);
    const RateStudyResult result = run_rate_study(config);
    bool ok = true;
    for (std::size_t i = 1; i < result.per_n.size(); ++i) {
      ok = ok && result.per_n[i].mean_sup_error <= result.per_n[i - 1].mean_sup_error;
    }
    monotone += ok;
  }
  EXPECT_GE(monotone, 9);
}
