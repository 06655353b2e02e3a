#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "spa/plap.hpp"

namespace {

void BM_PlapStep(benchmark::State& state) {
  spa::PLapConfig cfg;
  cfg.N = static_cast<int>(state.range(0));
  const auto x = spa::DiscreteField::sample(cfg.N, [](double s) { return std::sin(std::numbers::pi * s); }).to_state();
  spa::State out(x.size());
  for (auto _ : state) {
    spa::plap_step(x, 0.0, cfg.dt, cfg, cfg.eps_reg, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PlapStep)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oN);

void BM_AssumptionTail(benchmark::State& state) {
  const spa::PLapConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(spa::assumption_a_tail(cfg, 0.0));
}
BENCHMARK(BM_AssumptionTail);

void BM_AbsorbingRadius(benchmark::State& state) {
  const spa::PLapConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(spa::absorbing_radius(cfg, 1.0));
}
BENCHMARK(BM_AbsorbingRadius);

}  // namespace
