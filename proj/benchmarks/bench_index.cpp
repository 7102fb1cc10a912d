#include "knnlab/neighbor_index.hpp"
#include "knnlab/random.hpp"
#include "knnlab/sample_set.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace knnlab;

namespace {

SampleSet uniform_points(std::size_t n, std::size_t p, std::uint64_t seed) {
  CounterStream rng(seed, 0);
  std::vector<double> coords(n * p);
  for (double& v : coords) {
    v = rng.uniform();
  }
  return SampleSet(p, std::move(coords));
}

std::vector<double> queries(std::size_t count, std::size_t p) {
  CounterStream rng(99, 1);
  std::vector<double> xs(count * p);
  for (double& v : xs) {
    v = rng.uniform();
  }
  return xs;
}

void BM_Build(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<std::size_t>(state.range(1));
  const SampleSet data = uniform_points(n, p, 1);
  for (auto _ : state) {
    NeighborIndex index(data);
    benchmark::DoNotOptimize(index.node_count());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Build)->ArgsProduct({{1 << 12, 1 << 15, 1 << 18}, {1, 3, 5}})->Unit(benchmark::kMillisecond);

void BM_TreeQuery(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const SampleSet data = uniform_points(n, p, 1);
  const NeighborIndex index(data);
  const auto xs = queries(1024, p);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.query({xs.data() + (q % 1024) * p, p}, k).radius);
    ++q;
  }
}
BENCHMARK(BM_TreeQuery)->ArgsProduct({{1 << 12, 1 << 16, 1 << 18}, {1, 3, 5}, {10, 500}});

void BM_BruteForceQuery(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<std::size_t>(state.range(1));
  const SampleSet data = uniform_points(n, p, 1);
  const auto xs = queries(1024, p);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_query_bruteforce(data, {xs.data() + (q % 1024) * p, p}, 10).radius);
    ++q;
  }
}
BENCHMARK(BM_BruteForceQuery)->ArgsProduct({{1 << 12, 1 << 16}, {1, 3, 5}});

}  // namespace
