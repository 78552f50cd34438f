// Serial reference kernels against their OpenMP counterparts.
// Range argument: thread count for the parallel variants (0 = OpenMP default).

#include <benchmark/benchmark.h>

#include "fwm/counting.hpp"
#include "fwm/dispersion.hpp"
#include "fwm/jsa.hpp"
#include "fwm/parallel.hpp"
#include "fwm/phasematch.hpp"

using namespace fwm;

namespace {

FwmConfig fwm_config() {
  FwmConfig c;
  c.peak_pump_power = 0.0;
  return c;
}

Grid2D grid(std::size_t n) { return {SpectralAxis(505.0, 523.0, n), SpectralAxis(1480.0, 1610.0, n)}; }

SourceState source() {
  SourceState s;
  s.schmidt_lambdas = {0.9, 0.08, 0.02};
  s.gain = 0.6;
  return s;
}

DetectionChains chains() {
  DetectionChains c;
  c.signal_detector = {0.094, 1e-5};
  c.idler_detector = {0.055, 1e-5};
  return c;
}

void BM_JsaSerial(benchmark::State& state) {
  const auto g = grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_jsa_serial(canonical_profile(), fwm_config(), PumpEnvelope{}, g));
}

void BM_JsaParallel(benchmark::State& state) {
  const auto g = grid(static_cast<std::size_t>(state.range(0)));
  set_default_threads(resolve_threads(static_cast<int>(state.range(1))));
  for (auto _ : state) benchmark::DoNotOptimize(build_jsa(canonical_profile(), fwm_config(), PumpEnvelope{}, g));
}

void BM_ContourSerial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_contour_serial(canonical_profile(), fwm_config(), 700.0, 850.0, 301));
}

void BM_ContourParallel(benchmark::State& state) {
  set_default_threads(resolve_threads(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve_contour(canonical_profile(), fwm_config(), 700.0, 850.0, 301));
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const auto s = source();
  const auto c = chains();
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_run_serial(s, c, 200000, 1));
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const auto s = source();
  const auto c = chains();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_run(s, c, 200000, 1, threads));
}

}  // namespace

BENCHMARK(BM_JsaSerial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JsaParallel)->Args({256, 0})->Args({512, 1})->Args({512, 2})->Args({512, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContourSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContourParallel)->Arg(1)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(1)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
