#include <benchmark/benchmark.h>

#include "ncdlab/cluster.hpp"
#include "ncdlab/rng.hpp"

using namespace ncdlab;

static void BM_KMeans(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng(3);
  RowMatrix x(n, 64);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 64; ++j) x(i, j) = rng.normal() + (i % k) * 0.5;
  for (auto _ : state)
    benchmark::DoNotOptimize(cluster::kmeans(x, {.k = k, .restarts = 10, .seed = 1}));
}
BENCHMARK(BM_KMeans)->Args({200, 2})->Args({1200, 12})->Unit(benchmark::kMillisecond);

static void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(4);
  std::vector<std::vector<long>> w(n, std::vector<long>(n));
  for (auto& row : w)
    for (auto& v : row) v = static_cast<long>(rng.uniform_index(100));
  for (auto _ : state) benchmark::DoNotOptimize(cluster::max_weight_matching(w));
}
BENCHMARK(BM_Hungarian)->Arg(12)->Arg(64);
