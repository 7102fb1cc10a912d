#include "knnlab/errors.hpp"
#include "knnlab/estimators.hpp"
#include "knnlab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace knnlab;

namespace {

constexpr double kPhi1 = 0.241970724519143349797830192936;

EstimatorConfig config_with_k(std::size_t k, const char* kernel = "gaussian_product:p=1:r=1") {
  EstimatorConfig config;
  config.kernel = make_kernel(parse_kernel_spec(kernel));
  config.k_override = k;
  return config;
}

struct RandomCase {
  SampleSet data;
  std::vector<std::vector<double>> queries;
  EstimatorConfig config;
};

RandomCase random_case(CounterStream& rng, bool positive_responses = false) {
  const std::size_t n = 20 + static_cast<std::size_t>(rng.uniform() * 200);
  const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform() * 3);
  std::vector<double> coords(n * p);
  for (double& v : coords) {
    v = rng.uniform();
  }
  std::vector<double> y(n);
  for (double& v : y) {
    v = positive_responses ? 3.0 * rng.uniform() : 4.0 * rng.normal();
  }
  EstimatorConfig config;
  const char* families[] = {"gaussian_product", "gaussian_radial", "epanechnikov_radial"};
  KernelSpec spec;
  spec.family = parse_kernel_spec(families[static_cast<int>(rng.uniform() * 3)]).family;
  spec.dimension = static_cast<int>(p);
  config.kernel = make_kernel(spec);
  config.c1 = 0.55 + 0.4 * rng.uniform();
  config.c2 = 0.09;
  std::vector<std::vector<double>> queries(5, std::vector<double>(p));
  for (auto& q : queries) {
    for (double& v : q) {
      v = 0.1 + 0.8 * rng.uniform();
    }
  }
  return {SampleSet(p, std::move(coords), std::move(y)), std::move(queries), config};
}

SampleSet with_responses(const SampleSet& s, std::vector<double> y) {
  return SampleSet(s.dimension(), s.coordinates(), std::move(y));
}

void expect_relative(double a, double b, double tol) {
  EXPECT_LE(std::fabs(a - b), tol * std::max(std::fabs(a), std::fabs(b))) << a << " vs " << b;
}

}  // namespace

TEST(Schedules, K) {
  EXPECT_EQ(schedule_k(100, 0.6), 15u);
  EXPECT_EQ(schedule_k(1, 0.7), 1u);
  EXPECT_EQ(schedule_k(65536, 0.7), 2352u);
  EXPECT_EQ(schedule_k(1024, 0.7), 128u);
  EXPECT_EQ(schedule_k(10000, 0.7), 630u);
  EXPECT_THROW(schedule_k(100, 0.5), InvalidSchedule);
  EXPECT_THROW(schedule_k(100, 1.0), InvalidSchedule);
  for (std::uint64_t n = 1; n < 5000; n += 7) {
    const std::size_t k = schedule_k(n, 0.99);
    ASSERT_GE(k, 1u);
    ASSERT_LE(k, n);
  }
}

TEST(Schedules, B) {
  EXPECT_NEAR(schedule_b(1024, 0.05), 0.707106781186547524400844362105, 1e-15);
  EXPECT_EQ(schedule_b(1, 0.07), 1.0);
  EXPECT_NEAR(schedule_b(1000000, 0.09), 0.288403150312660594239196924659, 1e-15);
  EXPECT_THROW(schedule_b(10, 0.1), InvalidSchedule);
  EXPECT_THROW(schedule_b(10, 0.0), InvalidSchedule);
}

TEST(Schedules, M) {
  EXPECT_NEAR(schedule_M(55, 1.0), 2.00183245683360597235910835738, 1e-14);
  EXPECT_NEAR(schedule_M(2, 3.0), 2.49766383347309326905949393469, 1e-14);
  EXPECT_THROW(schedule_M(10, 0.0), InvalidSchedule);
  EXPECT_THROW(schedule_M(1, 1.0), InvalidSchedule);
}

TEST(Schedules, MessagesNameTheAssumption) {
  try {
    validate_c1(0.4);
    FAIL();
  } catch (const InvalidSchedule& e) {
    EXPECT_NE(std::string(e.what()).find("Assumption 5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("(1/2, 1)"), std::string::npos);
  }
}

TEST(DensityAt, TwoPoints) {
  const SampleSet s(1, {-1.0, 1.0});
  const NeighborIndex index(s);
  const EstimateAtPoint e = density_at(index, config_with_k(2), std::vector<double>{0.0});
  EXPECT_EQ(e.radius_used, 1.0);
  EXPECT_EQ(e.k_used, 2u);
  EXPECT_NEAR(e.value, kPhi1, 1e-16);
}

TEST(DensityAt, SinglePoint) {
  const SampleSet s(1, {2.0});
  const NeighborIndex index(s);
  const EstimateAtPoint e = density_at(index, config_with_k(1), std::vector<double>{0.0});
  EXPECT_EQ(e.radius_used, 2.0);
  EXPECT_NEAR(e.value, kPhi1 / 2.0, 1e-16);
}

TEST(DensityAt, SumsOverAllPoints) {
  // k = 1 but the far point still contributes through the Gaussian tail.
  const SampleSet s(1, {1.0, 3.0});
  const NeighborIndex index(s);
  const EstimateAtPoint e = density_at(index, config_with_k(1), std::vector<double>{0.0});
  const double phi3 = std::exp(-4.5) / std::sqrt(2.0 * std::acos(-1.0));
  EXPECT_NEAR(e.value, (kPhi1 + phi3) / 2.0, 1e-16);
}

TEST(DensityAt, DegeneratePolicies) {
  const SampleSet s(1, {5.0, 5.0, 5.0, 6.0});
  const NeighborIndex index(s);
  EstimatorConfig config = config_with_k(2);
  EXPECT_THROW(density_at(index, config, std::vector<double>{5.0}), DegenerateRadius);
  config.degenerate_policy = DegeneratePolicy::epsilon_radius;
  const EstimateAtPoint e = density_at(index, config, std::vector<double>{5.0});
  EXPECT_EQ(e.radius_used, 1e-12 * s.bounding_diameter());
  EXPECT_TRUE(std::isfinite(e.value));
}

TEST(DensityAt, DimensionMismatch) {
  const SampleSet s(2, {0.0, 0.0, 1.0, 1.0});
  const NeighborIndex index(s);
  EXPECT_THROW(density_at(index, config_with_k(1), std::vector<double>{0.0, 0.0}), DimensionMismatch);
  EXPECT_THROW(density_at(index, config_with_k(1, "gaussian_product:p=2:r=1"), std::vector<double>{0.0}),
               DimensionMismatch);
}

TEST(GAt, Examples) {
  const SampleSet s(1, {-1.0, 1.0}, std::vector<double>{2.0, 4.0});
  const NeighborIndex index(s);
  EXPECT_NEAR(g_at(index, config_with_k(2), std::vector<double>{0.0}).value, 0.725912173557430049393490578808, 1e-15);

  const SampleSet zeros = with_responses(s, {0.0, 0.0});
  const NeighborIndex zi(zeros);
  EXPECT_EQ(g_at(zi, config_with_k(2), std::vector<double>{0.3}).value, 0.0);

  const SampleSet ones = with_responses(s, {1.0, 1.0});
  const NeighborIndex oi(ones);
  EXPECT_EQ(g_at(oi, config_with_k(1), std::vector<double>{0.3}).value,
            density_at(oi, config_with_k(1), std::vector<double>{0.3}).value);

  const SampleSet bare(1, {0.0, 1.0});
  const NeighborIndex bi(bare);
  EXPECT_THROW(g_at(bi, config_with_k(1), std::vector<double>{0.0}), MissingResponses);
}

TEST(GSplitAt, Examples) {
  const SampleSet s(1, {-1.0, 1.0}, std::vector<double>{2.0, -4.0});
  const NeighborIndex index(s);
  const SplitEstimate split = g_split_at(index, config_with_k(2), std::vector<double>{0.0});
  EXPECT_NEAR(split.g1_hat, kPhi1, 1e-16);
  EXPECT_NEAR(split.g2_hat, 2.0 * kPhi1, 1e-16);
  EXPECT_NEAR(split.g1_hat - split.g2_hat, -kPhi1, 1e-16);

  const SampleSet pos = with_responses(s, {2.0, 0.0});
  const NeighborIndex pi(pos);
  EXPECT_EQ(g_split_at(pi, config_with_k(2), std::vector<double>{0.0}).g2_hat, 0.0);
  const SampleSet neg = with_responses(s, {-2.0, -1.0});
  const NeighborIndex ni(neg);
  EXPECT_EQ(g_split_at(ni, config_with_k(2), std::vector<double>{0.0}).g1_hat, 0.0);
}

TEST(RegressionAt, Examples) {
  const SampleSet s(1, {-1.0, 1.0}, std::vector<double>{2.0, 4.0});
  const NeighborIndex index(s);
  // b_n is negligible for n = 2^62.
  const EstimateAtPoint e = regression_at(index, config_with_k(2), std::vector<double>{0.0}, 1ull << 62);
  EXPECT_EQ(e.value, 3.0);
  EXPECT_FALSE(e.floored);

  EstimatorConfig compact = config_with_k(1, "epanechnikov_radial:p=1:r=1");
  const SampleSet far(1, {0.0, 0.1, 0.2, 10.0}, std::vector<double>{1.0, 1.0, 1.0, 1.0});
  const NeighborIndex fi(far);
  compact.k_override = 1;
  const EstimateAtPoint f = regression_at(fi, compact, std::vector<double>{5.0}, far.size());
  const double g = g_at(fi, compact, std::vector<double>{5.0}).value;
  EXPECT_TRUE(f.floored);
  EXPECT_EQ(f.value, g / schedule_b(4, compact.c2));
}

TEST(RegressionAt, ConstantResponse) {
  CounterStream rng(3, 0);
  std::vector<double> x(400);
  for (double& v : x) {
    v = rng.uniform();
  }
  const SampleSet s(1, x, std::vector<double>(400, 2.5));
  const NeighborIndex index(s);
  EstimatorConfig config;
  config.c2 = 0.09;
  const EstimateAtPoint e = regression_at(index, config, std::vector<double>{0.5}, s.size());
  ASSERT_FALSE(e.floored);
  EXPECT_NEAR(e.value, 2.5, 4.0 * std::numeric_limits<double>::epsilon() * 2.5);
}

TEST(EstimatorProperties, SplitIdentity) {
  CounterStream rng(100, 0);
  for (int t = 0; t < 1000; ++t) {
    const RandomCase c = random_case(rng);
    const NeighborIndex index(c.data);
    const std::size_t k = c.config.neighbors_for(c.data.size());
    for (const auto& x : c.queries) {
      const double g = g_at(index, c.config, x).value;
      const SplitEstimate split = g_split_at(index, c.config, x);
      const double radius = index.query(x, k).radius;
      const KernelSums sums = kernel_sums(c.data, c.config.kernel, x, radius, SumSelection::with_responses);
      const double scale = 1.0 / (static_cast<double>(c.data.size()) *
                                  std::pow(radius, static_cast<double>(c.data.dimension())));
      const double bound = 2.0 * std::numeric_limits<double>::epsilon() * sums.abs_response * scale;
      ASSERT_LE(std::fabs((split.g1_hat - split.g2_hat) - g), bound);
    }
  }
}

TEST(EstimatorProperties, AffineResponse) {
  CounterStream rng(101, 0);
  std::size_t unfloored = 0;
  for (int t = 0; t < 100; ++t) {
    const RandomCase c = random_case(rng);
    const double shift = 10.0 * rng.uniform() - 5.0;
    std::vector<double> y = c.data.responses();
    for (double& v : y) {
      v += shift;
    }
    const SampleSet shifted = with_responses(c.data, y);
    const NeighborIndex a(c.data);
    const NeighborIndex b(shifted);
    for (const auto& x : c.queries) {
      const double f = density_at(a, c.config, x).value;
      const double g0 = g_at(a, c.config, x).value;
      const double g1 = g_at(b, c.config, x).value;
      EXPECT_LE(std::fabs(g1 - (g0 + shift * f)), 1e-10 * (std::fabs(g0) + std::fabs(shift * f)));
      const EstimateAtPoint r0 = regression_at(a, c.config, x, c.data.size());
      const EstimateAtPoint r1 = regression_at(b, c.config, x, c.data.size());
      if (!r0.floored) {
        ++unfloored;
        EXPECT_LE(std::fabs(r1.value - (r0.value + shift)), 1e-10 * (std::fabs(r0.value) + std::fabs(shift)));
      }
    }
  }
  EXPECT_GT(unfloored, 100u);
}

TEST(EstimatorProperties, TranslationAndScale) {
  CounterStream rng(102, 0);
  for (int t = 0; t < 100; ++t) {
    const RandomCase c = random_case(rng);
    const std::size_t p = c.data.dimension();
    const double shift = 6.0 * rng.uniform() - 3.0;
    const double s = 0.25 + 3.0 * rng.uniform();
    std::vector<double> moved = c.data.coordinates();
    std::vector<double> scaled = c.data.coordinates();
    for (std::size_t i = 0; i < moved.size(); ++i) {
      moved[i] += shift;
      scaled[i] *= s;
    }
    const SampleSet a(p, moved, c.data.responses());
    const SampleSet b(p, scaled, c.data.responses());
    const NeighborIndex i0(c.data);
    const NeighborIndex ia(a);
    const NeighborIndex ib(b);
    const double sp = std::pow(s, -static_cast<double>(p));
    for (const auto& x : c.queries) {
      std::vector<double> xa = x;
      std::vector<double> xb = x;
      for (std::size_t j = 0; j < p; ++j) {
        xa[j] += shift;
        xb[j] *= s;
      }
      expect_relative(density_at(ia, c.config, xa).value, density_at(i0, c.config, x).value, 1e-10);
      expect_relative(g_at(ia, c.config, xa).value, g_at(i0, c.config, x).value, 1e-10);
      expect_relative(regression_at(ia, c.config, xa, a.size()).value,
                      regression_at(i0, c.config, x, a.size()).value, 1e-10);
      expect_relative(density_at(ib, c.config, xb).value, sp * density_at(i0, c.config, x).value, 1e-10);
      expect_relative(g_at(ib, c.config, xb).value, sp * g_at(i0, c.config, x).value, 1e-10);
      const EstimateAtPoint r0 = regression_at(i0, c.config, x, a.size());
      const EstimateAtPoint rb = regression_at(ib, c.config, xb, a.size());
      if (!r0.floored && !rb.floored) {
        expect_relative(rb.value, r0.value, 1e-10);
      }
    }
  }
}

TEST(EstimatorProperties, FloorDominanceAndNonnegativity) {
  CounterStream rng(103, 0);
  for (int t = 0; t < 100; ++t) {
    const RandomCase c = random_case(rng, true);
    const NeighborIndex index(c.data);
    const double b = schedule_b(c.data.size(), c.config.c2);
    for (const auto& x : c.queries) {
      const double f = density_at(index, c.config, x).value;
      const double g = g_at(index, c.config, x).value;
      const double r = regression_at(index, c.config, x, c.data.size()).value;
      EXPECT_GE(f, 0.0);
      EXPECT_GE(g, 0.0);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(std::fabs(r), std::fabs(g) / b * (1.0 + 1e-15));
    }
  }
}

TEST(FixedBandwidth, SeparateNormalizingBandwidth) {
  const SampleSet s(1, {-1.0, 1.0});
  const Kernel k = make_kernel(KernelSpec{});
  EXPECT_NEAR(fixed_bandwidth_density(s, k, std::vector<double>{0.0}, 1.0, 2.0), kPhi1 / 2.0, 1e-16);
  EXPECT_NEAR(fixed_bandwidth_density(s, k, std::vector<double>{0.0}, 1.0, 1.0), kPhi1, 1e-16);
}
