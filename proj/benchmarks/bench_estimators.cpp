#include "knnlab/estimators.hpp"
#include "knnlab/rate_lab.hpp"
#include "knnlab/synthetic_models.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace knnlab;

namespace {

void BM_DensityAt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SyntheticModel model = make_model("M3");
  const TrialSample drawn = model.sample(n, 1, 2.0);
  const NeighborIndex index(drawn.sample);
  EstimatorConfig config;
  if (state.range(1) == 1) {
    config.kernel = make_kernel(parse_kernel_spec("epanechnikov_radial:p=1:r=1"));
  }
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(density_at(index, config, std::vector<double>{x}).value);
    x = x < 0.9 ? x + 0.001 : 0.1;
  }
  state.SetLabel(state.range(1) == 1 ? "epanechnikov" : "gaussian");
}
BENCHMARK(BM_DensityAt)->ArgsProduct({{1 << 10, 1 << 13, 1 << 16}, {0, 1}});

void BM_RegressionAt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SyntheticModel model = make_model("M1");
  const TrialSample drawn = model.sample(n, 1, 2.0);
  const NeighborIndex index(drawn.sample);
  const EstimatorConfig config;
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(regression_at(index, config, std::vector<double>{x}, n).value);
    x = x < 0.9 ? x + 0.001 : 0.1;
  }
}
BENCHMARK(BM_RegressionAt)->Arg(1 << 10)->Arg(1 << 16);

void BM_SampleModel(benchmark::State& state) {
  ModelOverrides o;
  o.dimension = static_cast<std::size_t>(state.range(1));
  const SyntheticModel model = make_model("M2", o);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.sample(static_cast<std::size_t>(state.range(0)), 1, 2.0, stream++).clip_count);
  }
}
BENCHMARK(BM_SampleModel)->ArgsProduct({{1 << 12, 1 << 16}, {1, 3}})->Unit(benchmark::kMillisecond);

void BM_RateStudySmall(benchmark::State& state) {
  for (auto _ : state) {
    RateStudyConfig config(make_model("M3"));
    config.n_grid = {256, 512, 1024, 2048};
    config.grid_points = 50;
    config.threads = 1;
    benchmark::DoNotOptimize(run_rate_study(config).fitted_slope);
  }
}
BENCHMARK(BM_RateStudySmall)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
