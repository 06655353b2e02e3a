#include <benchmark/benchmark.h>

#include <random>

#include "spa/metric.hpp"

namespace {

spa::SetCloud random_cloud(std::size_t n, std::size_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<spa::State> pts(n, spa::State(dim));
  for (auto& p : pts)
    for (auto& x : p) x = u(rng);
  return spa::SetCloud(std::move(pts), spa::MetricDescriptor::euclidean(dim));
}

void BM_Hausdorff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto a = random_cloud(n, dim, 1), b = random_cloud(n, dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spa::hausdorff(a, b));
}
BENCHMARK(BM_Hausdorff)->ArgsProduct({{64, 256, 1024}, {1, 19}});

void BM_Prune(benchmark::State& state) {
  const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(spa::prune(a, 1e-3));
}
BENCHMARK(BM_Prune)->Arg(256)->Arg(1024)->Arg(4096);

}  // namespace
