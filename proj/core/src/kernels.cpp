#include "knnlab/kernels.hpp"

#include "knnlab/csv.hpp"
#include "knnlab/errors.hpp"
#include "knnlab/quadrature.hpp"
#include "knnlab/random.hpp"
#include "knnlab/summation.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace knnlab {

namespace {

double unit_ball_volume(int p) {
  return std::pow(std::numbers::pi, 0.5 * p) / std::tgamma(0.5 * p + 1.0);
}

double gaussian_normalizer(int p) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * p);
}

bool is_gaussian_family(KernelFamily family) {
  return family != KernelFamily::epanechnikov_radial;
}

struct FamilyName {
  std::string_view name;
  KernelFamily family;
};

constexpr FamilyName kFamilyNames[] = {
    {"gaussian_product", KernelFamily::gaussian_product},
    {"gaussian_radial", KernelFamily::gaussian_radial},
    {"epanechnikov_radial", KernelFamily::epanechnikov_radial},
    {"poly_gaussian_order_r", KernelFamily::poly_gaussian_order_r},
    {"gaussian", KernelFamily::gaussian_product},
    {"epanechnikov", KernelFamily::epanechnikov_radial},
    {"poly_gaussian", KernelFamily::poly_gaussian_order_r},
};

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::gaussian_product:
      return "gaussian_product";
    case KernelFamily::gaussian_radial:
      return "gaussian_radial";
    case KernelFamily::epanechnikov_radial:
      return "epanechnikov_radial";
    case KernelFamily::poly_gaussian_order_r:
      return "poly_gaussian_order_r";
  }
  return "unknown";
}

KernelSpec parse_kernel_spec(std::string_view text) {
  const auto parts = split(trim(text), ':');
  KernelSpec spec;
  bool found = false;
  for (const auto& entry : kFamilyNames) {
    if (parts[0] == entry.name) {
      spec.family = entry.family;
      found = true;
    }
  }
  if (!found) {
    throw UnsupportedKernelSpec("unknown kernel family '" + parts[0] + "'");
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) {
      throw UnsupportedKernelSpec("malformed kernel field '" + parts[i] + "'");
    }
    const std::string key = parts[i].substr(0, eq);
    const std::string value = parts[i].substr(eq + 1);
    double parsed = 0.0;
    try {
      parsed = parse_double(value);
    } catch (const ParseError&) {
      throw UnsupportedKernelSpec("kernel field '" + key + "' is not a number");
    }
    if (parsed != std::floor(parsed)) {
      throw UnsupportedKernelSpec("kernel field '" + key + "' must be an integer");
    }
    if (key == "p") {
      spec.dimension = static_cast<int>(parsed);
    } else if (key == "r") {
      spec.order = static_cast<int>(parsed);
    } else {
      throw UnsupportedKernelSpec("unknown kernel field '" + key + "'");
    }
  }
  return spec;
}

std::string format_kernel_spec(const KernelSpec& spec) {
  return std::string(to_string(spec.family)) + ":p=" + std::to_string(spec.dimension) +
         ":r=" + std::to_string(spec.order);
}

Kernel::Kernel(const KernelSpec& spec) : spec_(spec) {
  const int p = spec_.dimension;
  if (p < 1) {
    throw UnsupportedKernelSpec("kernel dimension must be >= 1");
  }
  if (spec_.order < 1) {
    throw UnsupportedKernelSpec("kernel order must be >= 1");
  }
  switch (spec_.family) {
    case KernelFamily::gaussian_product:
    case KernelFamily::gaussian_radial:
      if (!spec_.params.empty()) {
        throw UnsupportedKernelSpec("gaussian kernels take no polynomial parameters");
      }
      normalizer_ = gaussian_normalizer(p);
      sup_bound_ = normalizer_;
      break;
    case KernelFamily::epanechnikov_radial:
      if (!spec_.params.empty()) {
        throw UnsupportedKernelSpec("epanechnikov kernels take no polynomial parameters");
      }
      normalizer_ = (p + 2.0) / (2.0 * unit_ball_volume(p));
      sup_bound_ = normalizer_;
      break;
    case KernelFamily::poly_gaussian_order_r: {
      std::vector<double> expected;
      if (spec_.order == 1) {
        expected = {1.0};
      } else if (spec_.order == 3) {
        // (3 - u^2) / 2 per coordinate.
        expected = {1.5, -0.5};
      } else {
        throw UnsupportedKernelSpec("poly_gaussian_order_r supports r in {1, 3}, got r=" +
                                    std::to_string(spec_.order));
      }
      if (!spec_.params.empty() && spec_.params != expected) {
        throw UnsupportedKernelSpec("poly_gaussian_order_r parameters do not match the order-" +
                                    std::to_string(spec_.order) + " profile");
      }
      spec_.params = expected;
      normalizer_ = gaussian_normalizer(p);
      // Per-coordinate sup of |q(u^2)| phi(u) is attained at u = 0.
      sup_bound_ = std::pow(std::fabs(expected[0]), p) * normalizer_;
      break;
    }
  }
}

Kernel make_kernel(const KernelSpec& spec) {
  return Kernel(spec);
}

double Kernel::operator()(std::span<const double> u) const {
  if (u.size() != static_cast<std::size_t>(spec_.dimension)) {
    throw DimensionMismatch("kernel of dimension " + std::to_string(spec_.dimension) +
                            " evaluated at a point of dimension " + std::to_string(u.size()));
  }
  double squared = 0.0;
  double factor = 1.0;
  for (const double v : u) {
    const double v2 = v * v;
    squared += v2;
    if (spec_.family == KernelFamily::poly_gaussian_order_r) {
      factor *= poly_factor(v2);
    }
  }
  return from_squared_norm(squared, factor);
}

bool Kernel::nonnegative() const noexcept {
  return spec_.family != KernelFamily::poly_gaussian_order_r || spec_.order == 1;
}

double Kernel::gaussian_ratio(std::span<const double> u) const noexcept {
  switch (spec_.family) {
    case KernelFamily::gaussian_product:
    case KernelFamily::gaussian_radial:
      return 1.0;
    case KernelFamily::poly_gaussian_order_r: {
      double factor = 1.0;
      for (const double v : u) {
        factor *= poly_factor(v * v);
      }
      return factor;
    }
    case KernelFamily::epanechnikov_radial: {
      double squared = 0.0;
      for (const double v : u) {
        squared += v * v;
      }
      if (squared >= 1.0) {
        return 0.0;
      }
      return normalizer_ * (1.0 - squared) /
             (gaussian_normalizer(spec_.dimension) * std::exp(-0.5 * squared));
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Quadrature rules

namespace {

std::size_t integer_root(std::size_t value, int p) {
  auto root = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(value), 1.0 / p)));
  while (root > 0 && std::pow(static_cast<double>(root), p) > static_cast<double>(value)) {
    --root;
  }
  while (std::pow(static_cast<double>(root + 1), p) <= static_cast<double>(value)) {
    ++root;
  }
  return root;
}

constexpr std::size_t kMaxNodesPerAxis = 128;

KernelQuadrature gaussian_tensor_rule(const Kernel& kernel, std::size_t per_axis) {
  const int p = kernel.dimension();
  const GaussRule rule = gauss_hermite_probabilist(per_axis);
  std::size_t total = 1;
  for (int j = 0; j < p; ++j) {
    total *= per_axis;
  }
  KernelQuadrature q;
  q.dimension = p;
  q.nodes.resize(total * static_cast<std::size_t>(p));
  q.weights.resize(total);
  q.abs_weights.resize(total);
  std::vector<std::size_t> digit(static_cast<std::size_t>(p), 0);
  for (std::size_t i = 0; i < total; ++i) {
    double w = 1.0;
    for (int j = 0; j < p; ++j) {
      const std::size_t d = digit[static_cast<std::size_t>(j)];
      q.nodes[i * static_cast<std::size_t>(p) + static_cast<std::size_t>(j)] = rule.nodes[d];
      w *= rule.weights[d];
    }
    const double ratio = kernel.gaussian_ratio(q.node(i));
    q.weights[i] = w * ratio;
    q.abs_weights[i] = w * std::fabs(ratio);
    for (int j = p - 1; j >= 0; --j) {
      if (++digit[static_cast<std::size_t>(j)] < per_axis) {
        break;
      }
      digit[static_cast<std::size_t>(j)] = 0;
    }
  }
  return q;
}

// Polar rule for compactly supported radial kernels on the unit ball.
KernelQuadrature radial_ball_rule(const Kernel& kernel, std::size_t budget) {
  const int p = kernel.dimension();
  KernelQuadrature q;
  q.dimension = p;
  auto push = [&](std::initializer_list<double> node, double measure) {
    q.nodes.insert(q.nodes.end(), node);
    const double k = kernel(std::span<const double>(q.nodes.data() + q.nodes.size() - node.size(), node.size()));
    q.weights.push_back(measure * k);
    q.abs_weights.push_back(measure * std::fabs(k));
  };
  if (p == 1) {
    const std::size_t n = std::min<std::size_t>(budget, 2 * kMaxNodesPerAxis);
    if (n < 2) {
      throw IntegrationBudgetExceeded("budget too small for the radial rule");
    }
    const GaussRule rule = gauss_legendre(n, -1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      push({rule.nodes[i]}, rule.weights[i]);
    }
  } else if (p == 2) {
    // n radial nodes x 2n angles.
    const std::size_t n = std::min<std::size_t>(kMaxNodesPerAxis, integer_root(budget / 2, 2));
    if (n < 2) {
      throw IntegrationBudgetExceeded("budget too small for the polar rule");
    }
    const GaussRule radial = gauss_legendre(n, 0.0, 1.0);
    const std::size_t angles = 2 * n;
    const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(angles);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = radial.nodes[i];
      for (std::size_t a = 0; a < angles; ++a) {
        const double theta = (static_cast<double>(a) + 0.5) * dtheta;
        push({rho * std::cos(theta), rho * std::sin(theta)}, radial.weights[i] * rho * dtheta);
      }
    }
  } else if (p == 3) {
    // n radial x n polar (Gauss-Legendre in cos) x 2n azimuth.
    const std::size_t n = std::min<std::size_t>(kMaxNodesPerAxis / 2, integer_root(budget / 2, 3));
    if (n < 2) {
      throw IntegrationBudgetExceeded("budget too small for the spherical rule");
    }
    const GaussRule radial = gauss_legendre(n, 0.0, 1.0);
    const GaussRule polar = gauss_legendre(n, -1.0, 1.0);
    const std::size_t angles = 2 * n;
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(angles);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = radial.nodes[i];
      for (std::size_t c = 0; c < n; ++c) {
        const double z = polar.nodes[c];
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (std::size_t a = 0; a < angles; ++a) {
          const double phi = (static_cast<double>(a) + 0.5) * dphi;
          push({rho * s * std::cos(phi), rho * s * std::sin(phi), rho * z},
               radial.weights[i] * rho * rho * polar.weights[c] * dphi);
        }
      }
    }
  } else {
    throw PreconditionFailed("deterministic kernel quadrature requires p <= 3");
  }
  return q;
}

// Multisets of coordinate indices, i.e. the distinct mixed moments of a degree.
std::vector<std::vector<int>> index_multisets(int p, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(degree), 0);
  while (true) {
    out.push_back(current);
    int pos = degree - 1;
    while (pos >= 0 && current[static_cast<std::size_t>(pos)] == p - 1) {
      --pos;
    }
    if (pos < 0) {
      break;
    }
    const int next = current[static_cast<std::size_t>(pos)] + 1;
    for (int i = pos; i < degree; ++i) {
      current[static_cast<std::size_t>(i)] = next;
    }
  }
  return out;
}

struct MomentLayout {
  int order = 1;
  std::vector<int> degree_of;          // per moment slot
  std::vector<std::vector<int>> index;  // per moment slot
};

MomentLayout moment_layout(int p, int r) {
  MomentLayout layout;
  layout.order = r;
  for (int degree = 1; degree <= r; ++degree) {
    for (auto& multiset : index_multisets(p, degree)) {
      layout.degree_of.push_back(degree);
      layout.index.push_back(std::move(multiset));
    }
  }
  return layout;
}

// Values: [integral, moment slots..., abs (r+1)-moment].
std::vector<double> integrate_moments(const KernelQuadrature& rule, const MomentLayout& layout) {
  const std::size_t slots = layout.index.size();
  std::vector<CompensatedSum> sums(slots + 2);
  const double power = layout.order + 1.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto u = rule.node(i);
    const double w = rule.weights[i];
    sums[0].add(w);
    for (std::size_t m = 0; m < slots; ++m) {
      double monomial = 1.0;
      for (const int j : layout.index[m]) {
        monomial *= u[static_cast<std::size_t>(j)];
      }
      sums[m + 1].add(w * monomial);
    }
    double norm2 = 0.0;
    for (const double v : u) {
      norm2 += v * v;
    }
    sums[slots + 1].add(rule.abs_weights[i] * std::pow(norm2, 0.5 * power));
  }
  std::vector<double> values;
  values.reserve(sums.size());
  for (const auto& s : sums) {
    values.push_back(s.value());
  }
  return values;
}

// One antithetic Latin-hypercube replicate with `pairs` base points.
// Stratified antithetic sampler. Gaussian families draw from the standard
// normal and weight by K / phi; the compact radial family draws uniformly on
// the unit ball with stratified radius.
KernelQuadrature monte_carlo_rule(const Kernel& kernel, std::size_t pairs, std::uint64_t replicate) {
  const int p = kernel.dimension();
  const auto pp = static_cast<std::size_t>(p);
  CounterStream stream(0x6b65726e656c4d43ull, replicate);
  const boost::math::normal_distribution<double> normal;
  KernelQuadrature q;
  q.dimension = p;
  q.nodes.resize(2 * pairs * pp);
  std::vector<std::size_t> perm(pairs);
  auto shuffled_levels = [&] {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = pairs; i > 1; --i) {
      const auto pick = static_cast<std::size_t>(stream.uniform() * static_cast<double>(i));
      std::swap(perm[i - 1], perm[std::min(pick, i - 1)]);
    }
  };
  const bool ball = kernel.family() == KernelFamily::epanechnikov_radial;
  for (std::size_t j = 0; j < pp; ++j) {
    shuffled_levels();
    for (std::size_t i = 0; i < pairs; ++i) {
      const double level = (static_cast<double>(perm[i]) + stream.uniform_open()) / static_cast<double>(pairs);
      const double z = boost::math::quantile(normal, level);
      q.nodes[(2 * i) * pp + j] = z;
      q.nodes[(2 * i + 1) * pp + j] = -z;
    }
  }
  if (ball) {
    shuffled_levels();
    for (std::size_t i = 0; i < pairs; ++i) {
      double* u = q.nodes.data() + 2 * i * pp;
      double norm = 0.0;
      for (std::size_t j = 0; j < pp; ++j) {
        norm += u[j] * u[j];
      }
      norm = std::sqrt(norm);
      const double level = (static_cast<double>(perm[i]) + stream.uniform_open()) / static_cast<double>(pairs);
      const double radius = std::pow(level, 1.0 / p) / norm;
      for (std::size_t j = 0; j < pp; ++j) {
        u[j] *= radius;
        u[pp + j] = -u[j];
      }
    }
  }
  const double scale = (ball ? unit_ball_volume(p) : 1.0) / static_cast<double>(2 * pairs);
  q.weights.resize(2 * pairs);
  q.abs_weights.resize(2 * pairs);
  for (std::size_t i = 0; i < 2 * pairs; ++i) {
    const double ratio = ball ? kernel(q.node(i)) : kernel.gaussian_ratio(q.node(i));
    q.weights[i] = scale * ratio;
    q.abs_weights[i] = scale * std::fabs(ratio);
  }
  return q;
}

MomentReport summarize(const std::vector<double>& values, const MomentLayout& layout, double tolerance) {
  MomentReport report;
  report.integral_of_K = values.front();
  report.abs_moment_r_plus_1 = values.back();
  report.tolerance_used = tolerance;
  for (std::size_t m = 0; m < layout.index.size(); ++m) {
    auto& slot = report.max_abs_moment_per_degree[layout.degree_of[m]];
    slot = std::max(slot, std::fabs(values[m + 1]));
  }
  if (std::fabs(report.integral_of_K - 1.0) <= tolerance) {
    for (int degree = 1; degree <= layout.order; ++degree) {
      if (report.max_abs_moment_per_degree[degree] > tolerance) {
        break;
      }
      report.verified_order = degree;
    }
  }
  return report;
}

}  // namespace

KernelQuadrature kernel_quadrature(const Kernel& kernel, std::size_t budget) {
  const int p = kernel.dimension();
  if (p > 3) {
    throw PreconditionFailed("deterministic kernel quadrature requires p <= 3");
  }
  if (is_gaussian_family(kernel.family())) {
    const std::size_t per_axis = std::min(kMaxNodesPerAxis, integer_root(budget, p));
    if (per_axis < 2) {
      throw IntegrationBudgetExceeded("budget too small for a tensor rule");
    }
    return gaussian_tensor_rule(kernel, per_axis);
  }
  return radial_ball_rule(kernel, budget);
}

MomentReport check_moments(const Kernel& kernel, double tolerance, IntegrationMethod method, std::size_t budget) {
  const int p = kernel.dimension();
  const int r = kernel.order();
  if (!(tolerance > 0.0)) {
    throw PreconditionFailed("moment tolerance must be positive");
  }
  const MomentLayout layout = moment_layout(p, r);

  if (method == IntegrationMethod::tensor_quadrature) {
    if (p > 3) {
      throw PreconditionFailed("tensor_quadrature is limited to p <= 3; use monte_carlo");
    }
    if (budget == 0) {
      budget = 1;
      for (int j = 0; j < p; ++j) {
        budget *= kMaxNodesPerAxis;
      }
      budget = std::max<std::size_t>(budget, 1000);
    }
    if (budget < 1000) {
      throw PreconditionFailed("integration budget must be >= 1000 nodes");
    }
    const auto fine = integrate_moments(kernel_quadrature(kernel, budget), layout);
    const std::size_t coarse_axis = std::min(kMaxNodesPerAxis, integer_root(budget, p)) / 2;
    std::size_t coarse_budget = 1;
    for (int j = 0; j < p; ++j) {
      coarse_budget *= coarse_axis;
    }
    const auto coarse = integrate_moments(kernel_quadrature(kernel, std::max<std::size_t>(coarse_budget, 8)), layout);
    // Polynomial moments must agree between the two rules.
    for (std::size_t m = 0; m + 1 < fine.size(); ++m) {
      if (std::fabs(fine[m] - coarse[m]) > 0.1 * tolerance) {
        throw IntegrationBudgetExceeded("kernel moments did not converge within a budget of " +
                                        std::to_string(budget) + " nodes");
      }
    }
    MomentReport report = summarize(fine, layout, tolerance);
    const double abs_fine = fine.back();
    const double abs_coarse = coarse.back();
    report.abs_moment_finite = std::isfinite(abs_fine) &&
                               std::fabs(abs_fine - abs_coarse) <= 0.05 * std::fabs(abs_fine);
    return report;
  }

  if (budget == 0) {
    budget = 1'000'000;
  }
  if (budget < 1000) {
    throw PreconditionFailed("integration budget must be >= 1000 samples");
  }
  constexpr std::size_t kReplicates = 10;
  const std::size_t pairs = budget / (2 * kReplicates);
  std::vector<std::vector<double>> replicate_values;
  for (std::size_t rep = 0; rep < kReplicates; ++rep) {
    replicate_values.push_back(integrate_moments(monte_carlo_rule(kernel, pairs, rep), layout));
  }
  const std::size_t width = replicate_values.front().size();
  std::vector<double> mean(width, 0.0);
  std::vector<double> standard_error(width, 0.0);
  for (std::size_t m = 0; m < width; ++m) {
    for (const auto& v : replicate_values) {
      mean[m] += v[m];
    }
    mean[m] /= kReplicates;
    double ss = 0.0;
    for (const auto& v : replicate_values) {
      ss += (v[m] - mean[m]) * (v[m] - mean[m]);
    }
    standard_error[m] = std::sqrt(ss / (kReplicates - 1) / kReplicates);
  }
  const double worst_se = *std::max_element(standard_error.begin(), standard_error.end() - 1);
  if (4.0 * standard_error.front() > 1e-2) {
    throw IntegrationBudgetExceeded("Monte Carlo standard error of the kernel integral too large for a budget of " +
                                    std::to_string(budget) + " samples");
  }
  MomentReport report = summarize(mean, layout, std::max(tolerance, 4.0 * worst_se));
  report.standard_error = worst_se;
  report.abs_moment_finite = std::isfinite(mean.back());
  return report;
}

std::string moment_report_csv(const MomentReport& report) {
  std::string out = "degree,max_abs_moment\n";
  for (const auto& [degree, value] : report.max_abs_moment_per_degree) {
    out += std::to_string(degree) + "," + format_double(value) + "\n";
  }
  return out;
}

int default_monotone_grid(int p) noexcept {
  if (p <= 2) {
    return 256;
  }
  return p == 3 ? 32 : 16;
}

MonotoneCheck check_radial_monotone(const Kernel& kernel, int grid_points, int scale_points, double box) {
  if (grid_points < 16 || scale_points < 16) {
    throw PreconditionFailed("check_radial_monotone needs >= 16 grid and scale points");
  }
  const int p = kernel.dimension();
  const auto pp = static_cast<std::size_t>(p);
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> axis(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    axis[static_cast<std::size_t>(i)] = -box + 2.0 * box * i / (grid_points - 1);
  }
  std::vector<double> scales(static_cast<std::size_t>(scale_points));
  for (int i = 0; i < scale_points; ++i) {
    scales[static_cast<std::size_t>(i)] = static_cast<double>(i) / (scale_points - 1);
  }

  MonotoneCheck result;
  std::vector<std::size_t> digit(pp, 0);
  std::vector<double> x(pp);
  std::vector<double> ax(pp);
  while (true) {
    for (std::size_t j = 0; j < pp; ++j) {
      x[j] = axis[digit[j]];
    }
    const double kx = kernel(x);
    for (const double a : scales) {
      for (std::size_t j = 0; j < pp; ++j) {
        ax[j] = a * x[j];
      }
      const double kax = kernel(ax);
      if (kax < kx - eps) {
        const double violation = kx - kax;
        if (!result.witness || violation > result.witness->violation) {
          result.witness = MonotoneWitness{x, a, violation};
        }
        result.holds = false;
      }
    }
    std::size_t j = pp;
    while (j > 0) {
      --j;
      if (++digit[j] < axis.size()) {
        break;
      }
      digit[j] = 0;
      if (j == 0) {
        return result;
      }
    }
  }
}

}  // namespace knnlab
