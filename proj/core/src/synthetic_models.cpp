#include "knnlab/synthetic_models.hpp"

#include "knnlab/errors.hpp"
#include "knnlab/estimators.hpp"
#include "knnlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace knnlab {

namespace {

constexpr int kAnalytic = 64;

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double gaussian_pdf(double x, double mean, double scale) {
  return std_normal_pdf((x - mean) / scale) / scale;
}

// Lattice of about `target` points covering the cube in p dimensions.
template <typename Visit>
void for_each_lattice_point(const Cube& cube, std::size_t p, std::size_t target, Visit&& visit) {
  std::size_t per_axis = 2;
  while (std::pow(static_cast<double>(per_axis + 1), static_cast<double>(p)) <= static_cast<double>(target)) {
    ++per_axis;
  }
  std::vector<std::size_t> digit(p, 0);
  std::vector<double> x(p);
  while (true) {
    for (std::size_t j = 0; j < p; ++j) {
      x[j] = cube.lower + cube.side() * static_cast<double>(digit[j]) / static_cast<double>(per_axis - 1);
    }
    visit(std::span<const double>(x));
    std::size_t j = p;
    while (true) {
      if (j == 0) {
        return;
      }
      --j;
      if (++digit[j] < per_axis) {
        break;
      }
      digit[j] = 0;
    }
  }
}

}  // namespace

bool Cube::contains(std::span<const double> x) const noexcept {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v >= lower && v <= upper; });
}

SyntheticModel::SyntheticModel(ModelDefinition definition) : def_(std::move(definition)) {
  const std::size_t p = def_.dimension;
  if (p == 0) {
    throw ModelMisconfigured("model dimension must be >= 1");
  }
  if (!(def_.support.upper > def_.support.lower)) {
    throw ModelMisconfigured("support box is empty");
  }
  if (def_.evaluation_box.lower < def_.support.lower || def_.evaluation_box.upper > def_.support.upper ||
      !(def_.evaluation_box.upper > def_.evaluation_box.lower)) {
    throw ModelMisconfigured("evaluation box must be a nonempty subset of the support box");
  }
  const auto& dens = def_.density;
  if (dens.uniform_weight < 0.0 || dens.uniform_weight > 1.0) {
    throw ModelMisconfigured("uniform weight must lie in [0, 1]");
  }
  if (dens.uniform_weight < 1.0 && dens.components.empty()) {
    throw ModelMisconfigured("mixture weight without mixture components");
  }
  if (!(def_.noise.sigma >= 0.0) || !std::isfinite(def_.noise.sigma)) {
    throw ModelMisconfigured("noise sigma must be finite and >= 0");
  }
  double weight_total = 0.0;
  for (const auto& c : dens.components) {
    if (c.mean.size() != p || !(c.scale > 0.0) || !(c.weight > 0.0)) {
      throw ModelMisconfigured("mixture component needs a p-dimensional mean, positive scale and weight");
    }
    weight_total += c.weight;
  }
  if (!dens.components.empty() && std::fabs(weight_total - 1.0) > 1e-12) {
    throw ModelMisconfigured("mixture component weights must sum to 1");
  }

  const double volume = std::pow(def_.support.side(), static_cast<double>(p));
  double total_mass = 0.0;
  for (const auto& c : dens.components) {
    double mass = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      mass *= std_normal_cdf((def_.support.upper - c.mean[j]) / c.scale) -
              std_normal_cdf((def_.support.lower - c.mean[j]) / c.scale);
    }
    total_mass += c.weight * mass;
  }
  mixture_mass_ = total_mass;

  density_bound_ = dens.uniform_weight / volume;
  for (const auto& c : dens.components) {
    density_bound_ += (1.0 - dens.uniform_weight) * c.weight *
                      std::pow(2.0 * std::numbers::pi * c.scale * c.scale, -0.5 * static_cast<double>(p)) /
                      total_mass;
  }
  acceptance_ = 1.0 / (volume * density_bound_);
  if (acceptance_ < 1e-3) {
    throw ModelMisconfigured("rejection acceptance rate " + std::to_string(acceptance_) + " is below 1e-3");
  }

  double floor = std::numeric_limits<double>::infinity();
  for_each_lattice_point(def_.evaluation_box, p, 10'000,
                         [&](std::span<const double> x) { floor = std::min(floor, density_anywhere(x)); });
  c0_ = floor;
  if (!(c0_ > 0.0)) {
    throw ModelMisconfigured("density is not bounded away from zero on the evaluation box");
  }
}

double SyntheticModel::density_anywhere(std::span<const double> x) const noexcept {
  if (!def_.support.contains(x)) {
    return 0.0;
  }
  const std::size_t p = def_.dimension;
  const auto& dens = def_.density;
  double value = dens.uniform_weight / std::pow(def_.support.side(), static_cast<double>(p));
  for (std::size_t c = 0; c < dens.components.size(); ++c) {
    const auto& comp = dens.components[c];
    double product = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      product *= gaussian_pdf(x[j], comp.mean[j], comp.scale);
    }
    value += (1.0 - dens.uniform_weight) * comp.weight * product / mixture_mass_;
  }
  return value;
}

double SyntheticModel::regression_anywhere(std::span<const double> x) const noexcept {
  const auto& reg = def_.regression;
  if (reg.kind == RegressionSpec::Kind::sinusoid) {
    double sum = 0.0;
    for (const double v : x) {
      sum += std::sin(reg.frequency * v);
    }
    return reg.amplitude * sum;
  }
  double value = reg.coefficients.empty() ? 0.0 : reg.coefficients[0];
  for (const double v : x) {
    double power = 1.0;
    for (std::size_t d = 1; d < reg.coefficients.size(); ++d) {
      power *= v;
      value += reg.coefficients[d] * power;
    }
  }
  return value;
}

double SyntheticModel::truth_anywhere(ModelTarget target, std::span<const double> x) const {
  if (x.size() != def_.dimension) {
    throw DimensionMismatch("model of dimension " + std::to_string(def_.dimension) + " evaluated at a point of dimension " +
                            std::to_string(x.size()));
  }
  const double m = regression_anywhere(x);
  if (target == ModelTarget::regression) {
    return m;
  }
  const double f = density_anywhere(x);
  const double s = def_.noise.sigma;
  switch (target) {
    case ModelTarget::density:
      return f;
    case ModelTarget::g:
      return m * f;
    case ModelTarget::g1:
      // f E[Y 1{Y >= 0} | X = x] with Y ~ N(m, s^2).
      if (s == 0.0) {
        return f * std::max(m, 0.0);
      }
      return f * (m * std_normal_cdf(m / s) + s * std_normal_pdf(m / s));
    case ModelTarget::g2:
      if (s == 0.0) {
        return f * std::max(-m, 0.0);
      }
      return f * (s * std_normal_pdf(m / s) - m * std_normal_cdf(-m / s));
    default:
      break;
  }
  throw InvalidTarget("unknown model target");
}

void SyntheticModel::require_inside(std::span<const double> x) const {
  if (x.size() != def_.dimension) {
    throw DimensionMismatch("model of dimension " + std::to_string(def_.dimension) + " evaluated at a point of dimension " +
                            std::to_string(x.size()));
  }
  if (!def_.evaluation_box.contains(x)) {
    throw OutsideEvaluationBox("point lies outside the evaluation box of model " + def_.name);
  }
}

double SyntheticModel::truth(ModelTarget target, std::span<const double> x) const {
  require_inside(x);
  return truth_anywhere(target, x);
}

double SyntheticModel::true_density(std::span<const double> x) const {
  return truth(ModelTarget::density, x);
}
double SyntheticModel::true_regression(std::span<const double> x) const {
  return truth(ModelTarget::regression, x);
}
double SyntheticModel::true_g(std::span<const double> x) const {
  return truth(ModelTarget::g, x);
}
double SyntheticModel::true_g1(std::span<const double> x) const {
  return truth(ModelTarget::g1, x);
}
double SyntheticModel::true_g2(std::span<const double> x) const {
  return truth(ModelTarget::g2, x);
}

TrialSample SyntheticModel::sample(std::size_t n, std::uint64_t seed, double C_M, std::uint64_t stream) const {
  if (n < 2) {
    throw PreconditionFailed("sample size must be >= 2");
  }
  const double M_n = schedule_M(n, C_M);
  const std::size_t p = def_.dimension;
  CounterStream rng(seed, stream);
  std::vector<double> x(n * p);
  std::vector<double> y(n);
  std::size_t clipped = 0;
  const double lo = def_.support.lower;
  const double side = def_.support.side();
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> point(x.data() + i * p, p);
    while (true) {
      for (auto& v : point) {
        v = lo + side * rng.uniform();
      }
      if (def_.density.uniform_weight == 1.0) {
        break;
      }
      if (rng.uniform() * density_bound_ < density_anywhere(point)) {
        break;
      }
    }
    double response = regression_anywhere(point);
    if (def_.noise.sigma > 0.0) {
      response += def_.noise.sigma * rng.normal();
    }
    if (std::fabs(response) > M_n) {
      response = std::copysign(M_n, response);
      ++clipped;
    }
    y[i] = response;
  }
  return TrialSample{SampleSet(p, std::move(x), std::move(y)), seed, stream, clipped, M_n};
}

SyntheticModel make_model(const std::string& name, const ModelOverrides& overrides) {
  ModelDefinition def;
  def.name = name;
  def.dimension = overrides.dimension.value_or(1);
  if (def.dimension == 0) {
    throw ModelMisconfigured("model dimension must be >= 1");
  }
  if (name == "M1" || name == "M3") {
    const double box = overrides.box.value_or(1.0);
    if (!(box > 0.0)) {
      throw ModelMisconfigured("box must be > 0");
    }
    def.support = Cube{0.0, box};
    def.evaluation_box = def.support;
    def.density = DensitySpec{1.0, {}};
    def.regression.kind = RegressionSpec::Kind::sinusoid;
    def.regression.amplitude = 1.0;
    def.regression.frequency = 2.0 * std::numbers::pi;
    def.noise.sigma = name == "M1" ? overrides.sigma.value_or(0.5) : 0.0;
    if (name == "M3" && overrides.sigma && *overrides.sigma != 0.0) {
      throw ModelMisconfigured("M3 is noise-free; sigma override must be 0");
    }
    def.smoothness = kAnalytic;
  } else if (name == "M2") {
    const double box = overrides.box.value_or(3.0);
    if (!(box > 0.0)) {
      throw ModelMisconfigured("box must be > 0");
    }
    const double unit = box / 3.0;
    def.support = Cube{-box, box};
    def.evaluation_box = Cube{-2.0 * unit, 2.0 * unit};
    std::vector<double> minus(def.dimension, -unit);
    std::vector<double> plus(def.dimension, unit);
    def.density = DensitySpec{0.1, {{0.5, minus, 0.6 * unit}, {0.5, plus, 0.6 * unit}}};
    def.regression.kind = RegressionSpec::Kind::polynomial;
    def.regression.coefficients = {1.0, 0.5, -0.25};
    def.noise.sigma = overrides.sigma.value_or(0.5);
    def.smoothness = kAnalytic;
  } else {
    throw ModelMisconfigured("unknown model '" + name + "' (expected M1, M2 or M3)");
  }
  return SyntheticModel(std::move(def));
}

}  // namespace knnlab
