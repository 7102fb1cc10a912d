#pragma once

#include "knnlab/sample_set.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace knnlab {

/// Axis-aligned cube [lower, upper]^p.
struct Cube {
  double lower = 0.0;
  double upper = 1.0;

  bool contains(std::span<const double> x) const noexcept;
  double side() const noexcept { return upper - lower; }
};

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  double scale = 1.0;  // isotropic standard deviation
};

/// uniform_weight * Uniform(support) + (1 - uniform_weight) * (Gaussian
/// mixture truncated to the support box).
struct DensitySpec {
  double uniform_weight = 1.0;
  std::vector<MixtureComponent> components;
};

/// sinusoid:   r(x) = amplitude * sum_j sin(frequency * x_j)
/// polynomial: r(x) = coefficients[0] + sum_j sum_{d>=1} coefficients[d] x_j^d
struct RegressionSpec {
  enum class Kind { sinusoid, polynomial };
  Kind kind = Kind::polynomial;
  double amplitude = 1.0;
  double frequency = 1.0;
  std::vector<double> coefficients{0.0};
};

/// Centered Gaussian noise; sigma == 0 gives noise-free responses.
struct NoiseSpec {
  double sigma = 0.0;
};

struct ModelDefinition {
  std::string name = "custom";
  std::size_t dimension = 1;
  Cube support;
  Cube evaluation_box;
  DensitySpec density;
  RegressionSpec regression;
  NoiseSpec noise;
  /// Order of differentiability with Lipschitz derivatives on the box.
  int smoothness = 1;
};

enum class ModelTarget { density, regression, g, g1, g2 };

struct TrialSample {
  SampleSet sample;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t clip_count = 0;
  double M_n = 0.0;
};

/// Ground-truth generator. Immutable and safe to share across threads.
class SyntheticModel {
public:
  /// Throws ModelMisconfigured for inconsistent definitions (bad boxes,
  /// weights, rejection acceptance below 1e-3).
  explicit SyntheticModel(ModelDefinition definition);

  const std::string& name() const noexcept { return def_.name; }
  std::size_t dimension() const noexcept { return def_.dimension; }
  const Cube& support() const noexcept { return def_.support; }
  const Cube& evaluation_box() const noexcept { return def_.evaluation_box; }
  const ModelDefinition& definition() const noexcept { return def_; }
  double noise_sigma() const noexcept { return def_.noise.sigma; }
  int smoothness() const noexcept { return def_.smoothness; }
  /// Lower bound of f on the evaluation box (Assumption 1, box form).
  double density_floor() const noexcept { return c0_; }
  /// Expected acceptance rate of the rejection sampler.
  double acceptance_rate() const noexcept { return acceptance_; }

  // Closed-form truths; throw OutsideEvaluationBox when x is not in B.
  double true_density(std::span<const double> x) const;
  double true_regression(std::span<const double> x) const;
  double true_g(std::span<const double> x) const;
  double true_g1(std::span<const double> x) const;
  double true_g2(std::span<const double> x) const;
  double truth(ModelTarget target, std::span<const double> x) const;

  /// Truths on all of R^p (density-weighted targets vanish off the support).
  double truth_anywhere(ModelTarget target, std::span<const double> x) const;

  /// n i.i.d. pairs, X by rejection within the support box, Y = r(X) + noise
  /// clipped to [-M_n, M_n]. Deterministic in (seed, stream).
  TrialSample sample(std::size_t n, std::uint64_t seed, double C_M, std::uint64_t stream = 0) const;

private:
  double density_anywhere(std::span<const double> x) const noexcept;
  double regression_anywhere(std::span<const double> x) const noexcept;
  void require_inside(std::span<const double> x) const;

  ModelDefinition def_;
  double mixture_mass_ = 1.0;  // mixture probability inside the support box
  double density_bound_ = 0.0;
  double acceptance_ = 0.0;
  double c0_ = 0.0;
};

/// Overrides for the shipped models (`p=`, `sigma=`, `box=`).
struct ModelOverrides {
  std::optional<std::size_t> dimension;
  std::optional<double> sigma;
  std::optional<double> box;
};

/// Shipped models:
///  M1: uniform on [0, box]^p, r(x) = sum sin(2 pi x_j), Gaussian noise (sigma 0.5).
///  M2: 0.9 truncated two-component Gaussian mixture + 0.1 uniform on
///      [-box, box]^p (box 3), r(x) = 1 + sum (x_j/2 - x_j^2/4), noise 0.5;
///      evaluation box [-2 box/3, 2 box/3]^p.
///  M3: M1 without noise.
/// Throws ModelMisconfigured for unknown names.
SyntheticModel make_model(const std::string& name, const ModelOverrides& overrides = {});

}  // namespace knnlab
