#include <benchmark/benchmark.h>

#include "spa/attractor.hpp"
#include "spa/models.hpp"

namespace {

void BM_AdvanceLinear(benchmark::State& state) {
  const auto m = spa::make_linear(spa::ForcingSpec::sine());
  const spa::State x0{1.0};
  for (auto _ : state) benchmark::DoNotOptimize(spa::advance(m, -30.0, x0, 0.0));
}
BENCHMARK(BM_AdvanceLinear);

void BM_AdvanceInclusion(benchmark::State& state) {
  const auto m = spa::make_inclusion(1.0, 1e-2);
  const spa::State x0{0.0};
  for (auto _ : state) benchmark::DoNotOptimize(spa::advance(m, -10.0, x0, 0.0, spa::SelectionRule::pinned(0.5)));
}
BENCHMARK(BM_AdvanceInclusion);

void BM_PullbackSection(benchmark::State& state) {
  const auto m = spa::make_linear(spa::ForcingSpec::sine(), 1e-2);
  spa::PullbackConfig cfg;
  cfg.horizons = {20.0, 40.0};
  cfg.ensemble_size = static_cast<std::size_t>(state.range(0));
  cfg.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(spa::pullback_section(m, 0.0, cfg));
}
BENCHMARK(BM_PullbackSection)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
