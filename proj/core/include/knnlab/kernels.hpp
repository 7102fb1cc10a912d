#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace knnlab {

enum class KernelFamily {
  gaussian_product,
  gaussian_radial,
  epanechnikov_radial,
  poly_gaussian_order_r,
};

std::string_view to_string(KernelFamily family) noexcept;

/// Construction request for a kernel. `order` is the declared moment order r;
/// it is a claim that `check_moments` certifies or refutes.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian_product;
  int dimension = 1;
  int order = 1;
  std::vector<double> params;
};

/// Parses `family:p=<int>:r=<int>`, e.g. `gaussian_product:p=2:r=1`.
/// Accepts the short aliases `gaussian`, `epanechnikov` and `poly_gaussian`.
KernelSpec parse_kernel_spec(std::string_view text);
std::string format_kernel_spec(const KernelSpec& spec);

/// Multivariate kernel K : R^p -> R. Immutable; evaluation is pure and
/// thread-safe. Every family evaluates an even function of each coordinate,
/// so K(u) == K(-u) holds bit for bit.
class Kernel {
public:
  /// Throws UnsupportedKernelSpec for combinations that cannot be built.
  explicit Kernel(const KernelSpec& spec);

  const KernelSpec& spec() const noexcept { return spec_; }
  KernelFamily family() const noexcept { return spec_.family; }
  int dimension() const noexcept { return spec_.dimension; }
  int order() const noexcept { return spec_.order; }
  /// Coefficients of the per-coordinate polynomial factor in powers of u^2.
  const std::vector<double>& params() const noexcept { return spec_.params; }

  /// K(u). Throws DimensionMismatch if u.size() != p.
  double operator()(std::span<const double> u) const;

  /// K((xi - x) / h) for two p-vectors; no allocation, no checks.
  double at_offset(const double* xi, const double* x, double h) const noexcept {
    const int p = spec_.dimension;
    double squared = 0.0;
    double factor = 1.0;
    for (int j = 0; j < p; ++j) {
      const double u = (xi[j] - x[j]) / h;
      const double u2 = u * u;
      squared += u2;
      if (spec_.family == KernelFamily::poly_gaussian_order_r) {
        factor *= poly_factor(u2);
      }
    }
    return from_squared_norm(squared, factor);
  }

  /// Closed-form G = sup |K|.
  double sup_bound() const noexcept { return sup_bound_; }
  bool nonnegative() const noexcept;
  /// Scale of the profile in standard units (the Gaussian sd, the
  /// Epanechnikov support radius); used for boundary-margin rules.
  double profile_width() const noexcept { return 1.0; }

  /// K(u) / phi_p(u) where phi_p is the standard normal density on R^p.
  /// Importance weight for integration against a Gaussian measure.
  double gaussian_ratio(std::span<const double> u) const noexcept;

private:
  double poly_factor(double u_squared) const noexcept {
    double value = 0.0;
    for (auto it = spec_.params.rbegin(); it != spec_.params.rend(); ++it) {
      value = value * u_squared + *it;
    }
    return value;
  }

  double from_squared_norm(double squared, double factor) const noexcept {
    switch (spec_.family) {
      case KernelFamily::epanechnikov_radial:
        return squared < 1.0 ? normalizer_ * (1.0 - squared) : 0.0;
      case KernelFamily::poly_gaussian_order_r:
        return factor * normalizer_ * std::exp(-0.5 * squared);
      default:
        return normalizer_ * std::exp(-0.5 * squared);
    }
  }

  KernelSpec spec_;
  double normalizer_ = 1.0;
  double sup_bound_ = 0.0;
};

Kernel make_kernel(const KernelSpec& spec);

enum class IntegrationMethod { tensor_quadrature, monte_carlo };

struct MomentReport {
  double integral_of_K = 0.0;
  /// degree l in 1..r -> max over mixed moments of degree l of |moment|.
  std::map<int, double> max_abs_moment_per_degree;
  /// integral of ||u||^(r+1) |K(u)| du.
  double abs_moment_r_plus_1 = 0.0;
  bool abs_moment_finite = false;
  int verified_order = 0;
  double tolerance_used = 0.0;
  /// Largest Monte Carlo standard error over the reported moments (0 for
  /// quadrature).
  double standard_error = 0.0;
};

/// Numerically certifies the moment conditions up to the declared order.
/// Tensor quadrature (p <= 3) uses up to 128 nodes per axis within `budget`
/// nodes; Monte Carlo uses antithetic Latin hypercube replicates and widens the
/// tolerance to four standard errors when that exceeds `tolerance`.
MomentReport check_moments(const Kernel& kernel,
                           double tolerance = 1e-6,
                           IntegrationMethod method = IntegrationMethod::tensor_quadrature,
                           std::size_t budget = 0);

/// CSV with columns degree,max_abs_moment.
std::string moment_report_csv(const MomentReport& report);

struct MonotoneWitness {
  std::vector<double> x;
  double a = 0.0;
  /// K(x) - K(a x) > 0.
  double violation = 0.0;
};

struct MonotoneCheck {
  bool holds = true;
  std::optional<MonotoneWitness> witness;
};

/// Exhaustive grid search for K(a x) < K(x) over ||x||_inf <= box and
/// a in [0, 1]. The witness is the largest violation found.
/// Grid points per axis used by default for dimension p (the search is
/// grid^p * scale evaluations).
int default_monotone_grid(int p) noexcept;

MonotoneCheck check_radial_monotone(const Kernel& kernel,
                                    int grid_points = 256,
                                    int scale_points = 64,
                                    double box = 6.0);

/// Kernel quadrature: sum_i weights[i] * h(node_i) ~= integral K(u) h(u) du,
/// and abs_weights likewise for |K|. Nodes are stored row-major (size * p).
struct KernelQuadrature {
  int dimension = 1;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> abs_weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> node(std::size_t i) const noexcept {
    return {nodes.data() + i * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
  }
};

/// Deterministic tensor (Gaussian families) or polar (radial compact
/// families) rule with at most `budget` nodes; p <= 3.
KernelQuadrature kernel_quadrature(const Kernel& kernel, std::size_t budget);

}  // namespace knnlab
