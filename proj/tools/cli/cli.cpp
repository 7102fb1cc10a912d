#include "cli.hpp"

#include "settings.hpp"

#include "knnlab/csv.hpp"
#include "knnlab/errors.hpp"
#include "knnlab/estimators.hpp"
#include "knnlab/kernels.hpp"
#include "knnlab/neighbor_index.hpp"
#include "knnlab/random.hpp"
#include "knnlab/rate_lab.hpp"
#include "knnlab/sample_set.hpp"
#include "knnlab/synthetic_models.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>

#ifndef KNNLAB_VERSION
#define KNNLAB_VERSION "0.0.0"
#endif

namespace knnlab::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  Settings settings;
  unsigned threads = 0;
  std::ostream& out;
};

// Validated work ready to run; throws only runtime errors.
using Plan = std::function<void()>;

struct CommandSpec {
  std::string name;
  std::string description;
  std::map<std::string, std::string> defaults;
  std::function<Plan(Context&)> resolve;
};

template <typename F>
auto keyed(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

fs::path out_dir(const Settings& settings) {
  return fs::path(settings.text("out_dir").empty() ? "." : settings.text("out_dir"));
}

void write_manifest(const fs::path& dir, const std::string& command, const Context& ctx) {
  std::string text = "version=" + version_string() + "\n";
  text += "subcommand=" + command + "\n";
  text += "threads=" + std::to_string(ctx.threads) + "\n";
  if (!ctx.settings.has("seed")) {
    text += "seed=none\n";
  }
  text += ctx.settings.render();
  write_text_file(dir / "manifest.txt", text);
}

ModelOverrides model_overrides(const Settings& s) {
  ModelOverrides overrides;
  if (s.has("p")) {
    const std::int64_t p = s.integer("p");
    if (p < 1) {
      throw ConfigError("p", "must be >= 1");
    }
    overrides.dimension = static_cast<std::size_t>(p);
  }
  overrides.sigma = s.optional_real("sigma");
  overrides.box = s.optional_real("box");
  return overrides;
}

SyntheticModel resolve_model(const Settings& s) {
  const ModelOverrides overrides = model_overrides(s);
  return keyed("model", [&] { return make_model(s.text("model"), overrides); });
}

/// An empty kernel key means gaussian_product in the given dimension; a spec
/// without `p=` inherits it.
Kernel resolve_kernel(const Settings& s, std::size_t dimension) {
  return keyed("kernel", [&] {
    const std::string& text = s.text("kernel");
    if (text.empty()) {
      return make_kernel(KernelSpec{KernelFamily::gaussian_product, static_cast<int>(dimension), 1, {}});
    }
    KernelSpec spec = parse_kernel_spec(text);
    if (text.find("p=") == std::string::npos) {
      spec.dimension = static_cast<int>(dimension);
    }
    Kernel kernel = make_kernel(spec);
    if (static_cast<std::size_t>(kernel.dimension()) != dimension) {
      throw DimensionMismatch("kernel dimension " + std::to_string(kernel.dimension()) +
                              " differs from data dimension " + std::to_string(dimension));
    }
    return kernel;
  });
}

EstimatorConfig resolve_estimator(const Settings& s, Kernel kernel) {
  EstimatorConfig config;
  config.kernel = std::move(kernel);
  if (s.has("c1")) {
    config.c1 = s.real("c1");
    keyed("c1", [&] { validate_c1(config.c1); });
  }
  if (s.has("c2")) {
    config.c2 = s.real("c2");
    keyed("c2", [&] { validate_c2(config.c2); });
  }
  if (s.has("C_M")) {
    config.C_M = s.real("C_M");
    keyed("C_M", [&] { validate_C_M(config.C_M); });
  }
  return config;
}

std::string header_for(std::size_t p) {
  std::string out;
  for (std::size_t j = 0; j < p; ++j) {
    out += "x" + std::to_string(j + 1) + ",";
  }
  return out;
}

// ---------------------------------------------------------------------------

Plan resolve_kernel_check(Context& ctx) {
  const Settings& s = ctx.settings;
  const Kernel kernel = keyed("kernel", [&] { return make_kernel(parse_kernel_spec(s.text("kernel"))); });
  const double tolerance = s.real("tolerance");
  if (!(tolerance > 0.0)) {
    throw ConfigError("tolerance", "must be > 0");
  }
  IntegrationMethod method = kernel.dimension() <= 3 ? IntegrationMethod::tensor_quadrature
                                                     : IntegrationMethod::monte_carlo;
  if (s.text("method") == "tensor_quadrature") {
    method = IntegrationMethod::tensor_quadrature;
  } else if (s.text("method") == "monte_carlo") {
    method = IntegrationMethod::monte_carlo;
  } else if (s.text("method") != "auto") {
    throw ConfigError("method", "expected auto, tensor_quadrature or monte_carlo");
  }
  if (method == IntegrationMethod::tensor_quadrature && kernel.dimension() > 3) {
    throw ConfigError("method", "tensor_quadrature requires p <= 3");
  }
  const std::uint64_t budget = s.unsigned_integer("budget");
  if (budget != 0 && budget < 1000) {
    throw ConfigError("budget", "must be 0 (default) or >= 1000");
  }
  std::int64_t grid = s.integer("grid_points");
  if (grid == 0) {
    grid = default_monotone_grid(kernel.dimension());
  }
  const std::int64_t scales = s.integer("scale_points");
  if (grid < 16) {
    throw ConfigError("grid_points", "must be >= 16");
  }
  if (scales < 16) {
    throw ConfigError("scale_points", "must be >= 16");
  }
  const fs::path dir = out_dir(s);
  return [&ctx, kernel, tolerance, method, budget, grid, scales, dir] {
    const MomentReport report = check_moments(kernel, tolerance, method, budget);
    const MonotoneCheck monotone = check_radial_monotone(kernel, static_cast<int>(grid), static_cast<int>(scales));
    fs::create_directories(dir);
    write_text_file(dir / "moments.csv", moment_report_csv(report));
    std::string summary =
        "kernel,integral_of_K,abs_moment_r_plus_1,abs_moment_finite,declared_order,verified_order,"
        "tolerance_used,standard_error,radially_monotone,witness_norm,witness_a\n";
    summary += format_kernel_spec(kernel.spec()) + "," + format_double(report.integral_of_K) + "," +
               format_double(report.abs_moment_r_plus_1) + "," + (report.abs_moment_finite ? "1" : "0") + "," +
               std::to_string(kernel.order()) + "," + std::to_string(report.verified_order) + "," +
               format_double(report.tolerance_used) + "," + format_double(report.standard_error) + "," +
               (monotone.holds ? "1" : "0") + ",";
    if (monotone.witness) {
      double norm = 0.0;
      for (const double v : monotone.witness->x) {
        norm += v * v;
      }
      summary += format_double(std::sqrt(norm)) + "," + format_double(monotone.witness->a);
    } else {
      summary += ",";
    }
    summary += "\n";
    write_text_file(dir / "kernel_check.csv", summary);
    ctx.out << format_kernel_spec(kernel.spec()) << ": verified order " << report.verified_order
            << (monotone.holds ? ", radially monotone\n" : ", not radially monotone\n");
  };
}

Plan resolve_estimate(Context& ctx) {
  const Settings& s = ctx.settings;
  if (!s.has("data")) {
    throw ConfigError("data", "value required");
  }
  if (!s.has("grid")) {
    throw ConfigError("grid", "value required");
  }
  if (!s.has("out")) {
    throw ConfigError("out", "value required");
  }
  auto data = std::make_shared<const SampleSet>(keyed("data", [&] { return load_sample_set(s.text("data")); }));
  auto grid = std::make_shared<const PointGrid>(keyed("grid", [&] { return load_point_grid(s.text("grid")); }));
  if (grid->dimension != data->dimension()) {
    throw ConfigError("grid", "grid dimension " + std::to_string(grid->dimension) + " differs from data dimension " +
                                  std::to_string(data->dimension()));
  }
  EstimatorConfig config = resolve_estimator(s, resolve_kernel(s, data->dimension()));
  if (s.has("k")) {
    const std::int64_t k = s.integer("k");
    if (k < 1 || static_cast<std::size_t>(k) > data->size()) {
      throw ConfigError("k", "must lie in [1, n]");
    }
    config.k_override = static_cast<std::size_t>(k);
  }
  if (s.text("degenerate_policy") == "epsilon_radius") {
    config.degenerate_policy = DegeneratePolicy::epsilon_radius;
  } else if (s.text("degenerate_policy") != "error") {
    throw ConfigError("degenerate_policy", "expected error or epsilon_radius");
  }
  const StudyTarget target = keyed("target", [&] { return parse_study_target(s.text("target")); });
  if (target != StudyTarget::density && !data->has_responses()) {
    throw ConfigError("data", "target " + std::string(to_string(target)) + " needs a y column");
  }
  const fs::path out = s.text("out");
  return [data, grid, config, target, out] {
    const NeighborIndex index(*data);
    std::string csv = header_for(grid->dimension) + "value,radius_used,floored\n";
    for (std::size_t g = 0; g < grid->size(); ++g) {
      const auto x = grid->point(g);
      EstimateAtPoint e;
      switch (target) {
        case StudyTarget::density:
          e = density_at(index, config, x);
          break;
        case StudyTarget::g:
          e = g_at(index, config, x);
          break;
        case StudyTarget::regression:
          e = regression_at(index, config, x, data->size());
          break;
      }
      for (const double v : x) {
        csv += format_double(v) + ",";
      }
      csv += format_double(e.value) + "," + format_double(e.radius_used) + "," + (e.floored ? "1" : "0") + "\n";
    }
    if (out.has_parent_path()) {
      fs::create_directories(out.parent_path());
    }
    write_text_file(out, csv);
  };
}

Plan resolve_rate_study(Context& ctx) {
  const Settings& s = ctx.settings;
  const SyntheticModel model = resolve_model(s);
  const EstimatorConfig estimator = resolve_estimator(s, resolve_kernel(s, model.dimension()));
  const StudyTarget target = keyed("target", [&] { return parse_study_target(s.text("target")); });
  const std::uint64_t n_min = s.unsigned_integer("n_min");
  const std::uint64_t n_max = s.unsigned_integer("n_max");
  const std::uint64_t n_points = s.unsigned_integer("n_points");
  if (n_min < 2) {
    throw ConfigError("n_min", "must be >= 2");
  }
  if (n_max <= n_min) {
    throw ConfigError("n_max", "must exceed n_min");
  }
  if (n_points < 4) {
    throw ConfigError("n_points", "must be >= 4");
  }
  RateStudyConfig config(model);
  config.estimator = estimator;
  config.target = target;
  config.n_grid = keyed("n_points", [&] { return geometric_sizes(n_min, n_max, n_points); });
  config.trials = s.unsigned_integer("trials");
  if (config.trials < 10) {
    throw ConfigError("trials", "must be >= 10");
  }
  config.grid_points = s.unsigned_integer("grid");
  config.seed = s.unsigned_integer("seed");
  config.threads = ctx.threads;
  const std::int64_t leaf = s.integer("leaf_size");
  if (leaf < 1) {
    throw ConfigError("leaf_size", "must be >= 1");
  }
  config.leaf_size = static_cast<std::size_t>(leaf);
  // Fail on an empty inset grid before any trial runs.
  for (const std::uint64_t n : config.n_grid) {
    keyed("grid", [&] { study_grid(model, n, estimator.neighbors_for(n), config.grid_points); });
  }
  const fs::path dir = out_dir(s);
  return [&ctx, config, dir] {
    const RateStudyResult result = run_rate_study(config);
    fs::create_directories(dir);
    write_text_file(dir / "per_n.csv", per_n_csv(result));
    write_text_file(dir / "summary.csv", summary_csv(result));
    write_text_file(dir / "certification.csv",
                    "declared_order,verified_order,radially_monotone,rate_order\n" +
                        std::to_string(result.kernel.declared_order) + "," +
                        std::to_string(result.kernel.verified_order) + "," +
                        (result.kernel.radially_monotone ? "1" : "0") + "," + std::to_string(result.rate_order) +
                        "\n");
    ctx.out << "fitted_slope " << format_double(result.fitted_slope) << "\n";
  };
}

Plan resolve_sandwich(Context& ctx) {
  const Settings& s = ctx.settings;
  const SyntheticModel model = resolve_model(s);
  const EstimatorConfig estimator = resolve_estimator(s, resolve_kernel(s, model.dimension()));
  if (!check_radial_monotone(estimator.kernel, default_monotone_grid(estimator.kernel.dimension()), 64).holds) {
    throw ConfigError("kernel", "the sandwich diagnostic requires a radially monotone kernel");
  }
  const std::uint64_t n = s.unsigned_integer("n");
  if (n < 2) {
    throw ConfigError("n", "must be >= 2");
  }
  BetaRule beta;
  if (s.text("beta") != "canonical") {
    beta.kind = BetaRule::Kind::fixed;
    beta.value = s.real("beta");
    if (!(beta.value > 0.0 && beta.value <= 1.0)) {
      throw ConfigError("beta", "must be canonical or lie in (0, 1]");
    }
  }
  const std::uint64_t seed = s.unsigned_integer("seed");
  const std::uint64_t grid_points = s.unsigned_integer("grid");
  if (grid_points < 2) {
    throw ConfigError("grid", "must be >= 2");
  }
  const PointGrid grid = box_lattice(model.evaluation_box(), model.dimension(), grid_points);
  const fs::path dir = out_dir(s);
  return [&ctx, model, estimator, n, beta, seed, grid, dir] {
    const TrialSample drawn = model.sample(static_cast<std::size_t>(n), seed, estimator.C_M);
    const SandwichReport report = sandwich_diagnostic(model, drawn.sample, estimator, grid, beta);
    fs::create_directories(dir);
    write_text_file(dir / "sandwich.csv", sandwich_csv(report));
    write_text_file(dir / "sandwich_summary.csv",
                    "n,k,beta,grid_size,containment_rate,conditional_order_rate,order_violations\n" +
                        std::to_string(n) + "," + std::to_string(report.k) + "," + format_double(report.beta) + "," +
                        std::to_string(grid.size()) + "," + format_double(report.containment_rate) + "," +
                        format_double(report.conditional_order_rate) + "," +
                        std::to_string(report.order_violations) + "\n");
    ctx.out << "containment_rate " << format_double(report.containment_rate) << ", order violations "
            << report.order_violations << "\n";
  };
}

Plan resolve_bias_check(Context& ctx) {
  const Settings& s = ctx.settings;
  const SyntheticModel model = resolve_model(s);
  const Kernel kernel = resolve_kernel(s, model.dimension());
  if (model.dimension() > 2) {
    throw ConfigError("p", "bias-check quadrature supports p <= 2");
  }
  ModelTarget target = ModelTarget::density;
  const std::string& t = s.text("target");
  if (t == "density") {
    target = ModelTarget::density;
  } else if (t == "g") {
    target = ModelTarget::g;
  } else if (t == "g1") {
    target = ModelTarget::g1;
  } else if (t == "g2") {
    target = ModelTarget::g2;
  } else {
    throw ConfigError("target", "expected density, g, g1 or g2");
  }
  std::vector<double> x;
  if (s.has("x")) {
    x = s.reals("x");
  } else {
    const Cube& box = model.evaluation_box();
    x.assign(model.dimension(), box.lower + 0.25 * box.side());
  }
  if (x.size() != model.dimension()) {
    throw ConfigError("x", "expected " + std::to_string(model.dimension()) + " coordinates");
  }
  if (!model.evaluation_box().contains(x)) {
    throw ConfigError("x", "point lies outside the evaluation box");
  }
  const double D2 = s.real("D2");
  const double D1 = s.has("D1") ? s.real("D1") : D2;
  if (!(D2 > 0.0)) {
    throw ConfigError("D2", "must be > 0");
  }
  if (!(D1 > 0.0)) {
    throw ConfigError("D1", "must be > 0");
  }
  const std::uint64_t halvings = s.unsigned_integer("halvings");
  const std::uint64_t budget = s.unsigned_integer("budget");
  const fs::path dir = out_dir(s);
  return [&ctx, model, kernel, target, x, D1, D2, halvings, budget, dir] {
    std::string csv = "D1,D2,expected_value,truth,bias_abs,boundary_warning,ratio_to_previous\n";
    double previous = 0.0;
    for (std::uint64_t h = 0; h <= halvings; ++h) {
      const double scale = std::ldexp(1.0, -static_cast<int>(h));
      const BiasOracleResult r = bias_oracle(model, kernel, D1 * scale, D2 * scale, x, budget, target);
      csv += format_double(D1 * scale) + "," + format_double(D2 * scale) + "," + format_double(r.expected_value) +
             "," + format_double(r.truth) + "," + format_double(r.bias_abs) + "," +
             (r.boundary_warning ? "1" : "0") + "," + (h == 0 ? "" : format_double(previous / r.bias_abs)) + "\n";
      if (r.boundary_warning) {
        ctx.out << "warning: boundary bias at D2 = " << format_double(D2 * scale) << "\n";
      }
      previous = r.bias_abs;
    }
    fs::create_directories(dir);
    write_text_file(dir / "bias.csv", csv);
  };
}

Plan resolve_bench(Context& ctx) {
  const Settings& s = ctx.settings;
  const std::uint64_t n = s.unsigned_integer("n");
  const std::uint64_t p = s.unsigned_integer("p");
  const std::uint64_t queries = s.unsigned_integer("queries");
  const std::uint64_t k = s.unsigned_integer("k");
  const std::uint64_t seed = s.unsigned_integer("seed");
  const std::uint64_t leaf = s.unsigned_integer("leaf_size");
  if (n < 1) {
    throw ConfigError("n", "must be >= 1");
  }
  if (p < 1) {
    throw ConfigError("p", "must be >= 1");
  }
  if (queries < 1) {
    throw ConfigError("queries", "must be >= 1");
  }
  if (k < 1 || k > n) {
    throw ConfigError("k", "must lie in [1, n]");
  }
  if (leaf < 1) {
    throw ConfigError("leaf_size", "must be >= 1");
  }
  const fs::path dir = out_dir(s);
  return [&ctx, n, p, queries, k, seed, leaf, dir] {
    using clock = std::chrono::steady_clock;
    CounterStream points(seed, 0);
    std::vector<double> coords(n * p);
    for (double& v : coords) {
      v = points.uniform();
    }
    const SampleSet data(p, std::move(coords));
    CounterStream query_stream(seed, 1);
    std::vector<double> xs(queries * p);
    for (double& v : xs) {
      v = query_stream.uniform();
    }

    const auto t0 = clock::now();
    const NeighborIndex index(data, leaf);
    const auto t1 = clock::now();
    std::vector<RadiusResult> tree(queries);
    for (std::size_t q = 0; q < queries; ++q) {
      tree[q] = index.query({xs.data() + q * p, p}, k);
    }
    const auto t2 = clock::now();
    std::size_t agreement = 0;
    for (std::size_t q = 0; q < queries; ++q) {
      const RadiusResult brute = knn_query_bruteforce(data, {xs.data() + q * p, p}, k);
      if (brute.radius == tree[q].radius && brute.neighbor_ids == tree[q].neighbor_ids) {
        ++agreement;
      }
    }
    const auto t3 = clock::now();
    const auto seconds = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
    const double per = static_cast<double>(queries);
    fs::create_directories(dir);
    write_text_file(dir / "bench.csv",
                    "n,p,k,queries,leaf_size,build_seconds,query_seconds,bruteforce_query_seconds,agreement\n" +
                        std::to_string(n) + "," + std::to_string(p) + "," + std::to_string(k) + "," +
                        std::to_string(queries) + "," + std::to_string(leaf) + "," +
                        format_double(seconds(t0, t1)) + "," + format_double(seconds(t1, t2) / per) + "," +
                        format_double(seconds(t2, t3) / per) + "," + std::to_string(agreement) + "\n");
    ctx.out << "agreement " << agreement << "/" << queries << "\n";
  };
}

std::vector<CommandSpec> command_table() {
  const std::map<std::string, std::string> model_keys{{"model", ""}, {"p", ""}, {"sigma", ""}, {"box", ""}};
  auto with = [](std::map<std::string, std::string> base, std::map<std::string, std::string> extra) {
    extra.merge(base);
    return extra;
  };
  return {
      {"kernel-check",
       "Certify kernel moments and radial monotonicity",
       {{"kernel", "gaussian_product:p=1:r=1"},
        {"tolerance", "1e-6"},
        {"method", "auto"},
        {"budget", "0"},
        {"grid_points", "0"},
        {"scale_points", "64"},
        {"out_dir", "."}},
       resolve_kernel_check},
      {"estimate",
       "Evaluate an estimator on a grid",
       {{"data", ""},
        {"grid", ""},
        {"out", ""},
        {"kernel", ""},
        {"target", "density"},
        {"c1", "0.7"},
        {"c2", "0.05"},
        {"C_M", "2"},
        {"k", ""},
        {"degenerate_policy", "error"}},
       resolve_estimate},
      {"rate-study",
       "Monte Carlo sup-error scaling study",
       with(model_keys, {{"model", "M3"},
                         {"target", "density"},
                         {"kernel", ""},
                         {"c1", "0.7"},
                         {"c2", "0.05"},
                         {"C_M", "2"},
                         {"n_min", "1024"},
                         {"n_max", "65536"},
                         {"n_points", "7"},
                         {"trials", "50"},
                         {"seed", "1"},
                         {"grid", "0"},
                         {"leaf_size", "16"},
                         {"out_dir", "."}}),
       resolve_rate_study},
      {"sandwich",
       "Sandwich radii containment and ordering diagnostic",
       with(model_keys, {{"model", "M2"},
                         {"kernel", ""},
                         {"c1", "0.7"},
                         {"c2", "0.05"},
                         {"C_M", "2"},
                         {"n", "10000"},
                         {"seed", "1"},
                         {"grid", "200"},
                         {"beta", "canonical"},
                         {"out_dir", "."}}),
       resolve_sandwich},
      {"bias-check",
       "Quadrature bias oracle over halved bandwidths",
       with(model_keys, {{"model", "M1"},
                         {"kernel", ""},
                         {"target", "g"},
                         {"x", ""},
                         {"D1", ""},
                         {"D2", "0.04"},
                         {"halvings", "1"},
                         {"budget", "0"},
                         {"out_dir", "."}}),
       resolve_bias_check},
      {"bench",
       "kd-tree versus brute-force kNN timing",
       {{"n", "100000"},
        {"p", "3"},
        {"queries", "1000"},
        {"k", "10"},
        {"seed", "1"},
        {"leaf_size", "16"},
        {"out_dir", "."}},
       resolve_bench},
  };
}

std::optional<unsigned> env_threads() {
  const char* text = std::getenv("KNN_LAB_THREADS");
  if (text == nullptr || *text == '\0') {
    return std::nullopt;
  }
  try {
    const double value = parse_double(text);
    if (value < 0 || value != std::floor(value)) {
      throw ParseError("negative or fractional");
    }
    return static_cast<unsigned>(value);
  } catch (const ParseError&) {
    throw ConfigError("KNN_LAB_THREADS", "'" + std::string(text) + "' is not a thread count");
  }
}

}  // namespace

std::string version_string() {
  return std::string("knnlab ") + KNNLAB_VERSION;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-NN kernel estimators and rate laboratory", "knnlab"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  struct Bound {
    CommandSpec spec;
    CLI::App* sub = nullptr;
    std::string config;
    std::vector<std::string> assignments;
    std::map<std::string, std::string> flags;
    std::optional<unsigned> threads;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (auto& spec : command_table()) {
    auto b = std::make_unique<Bound>();
    b->spec = std::move(spec);
    b->sub = app.add_subcommand(b->spec.name, b->spec.description);
    b->sub->add_option("-c,--config", b->config, "key=value configuration file");
    b->sub->add_option("--set", b->assignments, "key=value override (repeatable)");
    b->sub->add_option("--threads", b->threads, "worker threads (default: KNN_LAB_THREADS or all cores)");
    for (const auto& [key, value] : b->spec.defaults) {
      std::string names = "--" + key;
      if (key == "out_dir") {
        names += ",--out-dir";
      }
      b->sub->add_option_function<std::string>(
          names, [raw = b.get(), key](const std::string& v) { raw->flags[key] = v; },
          value.empty() ? std::string("no default") : "default " + value);
    }
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (auto& b : bound) {
    if (!b->sub->parsed()) {
      continue;
    }
    Context ctx{Settings(b->spec.defaults), 0, out};
    Plan plan;
    try {
      if (!b->config.empty()) {
        ctx.settings.merge_file(b->config);
      }
      for (const auto& assignment : b->assignments) {
        ctx.settings.merge_assignment(assignment);
      }
      for (const auto& [key, value] : b->flags) {
        ctx.settings.set(key, value);
      }
      ctx.threads = b->threads ? *b->threads : env_threads().value_or(0);
      plan = b->spec.resolve(ctx);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    }
    try {
      plan();
      const fs::path dir = b->spec.name == "estimate" ? fs::path(ctx.settings.text("out")).parent_path()
                                                      : out_dir(ctx.settings);
      write_manifest(dir.empty() ? fs::path(".") : dir, b->spec.name, ctx);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
    return kExitOk;
  }
  return kExitValidation;
}

}  // namespace knnlab::cli
