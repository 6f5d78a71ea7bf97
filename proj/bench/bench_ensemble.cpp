#include "arx/limitmat.hpp"
#include "arx/mc.hpp"
#include "arx/models.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

arx::mc::EnsembleConfig ensemble(int runs, int workers) {
  arx::mc::EnsembleConfig c{arx::SimConfig{arx::benchmark_model()}};
  c.base.horizon = 1000;
  c.runs = runs;
  c.workers = workers;
  return c;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto c = ensemble(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(arx::mc::run_ensemble_serial(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EnsembleSerial)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EnsembleParallel(benchmark::State& state) {
  const auto c = ensemble(64, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(arx::mc::run_ensemble(c));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_LimitSet(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int d = static_cast<int>(state.range(0));
  const auto model = arx::random_causal_model(rng, d, 3, 3, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(arx::compute_limit_set(model));
}
BENCHMARK(BM_LimitSet)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
