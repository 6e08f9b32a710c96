// Serial reference kernels against their OpenMP counterparts.
// Run with OMP_NUM_THREADS=<n> to pick the thread count of the parallel variants.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nlc/analysis/acv.hpp"
#include "nlc/analysis/density.hpp"
#include "nlc/analysis/periodogram.hpp"
#include "nlc/hopf/hopf.hpp"
#include "nlc/sde/integrator.hpp"

using namespace nlc;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  double v = 0;
  for (auto& e : x) e = v = 0.95 * v + g(gen);
  return x;
}

const hopf::HopfParams kHopf = hopf::HopfParams::with_nsr(2 * std::numbers::pi, 2 * std::numbers::pi,
                                                          2 * std::numbers::pi, 1.0, 0.1);

void BM_AcvDirect(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(analysis::sample_acv(x, 1.0, 500, analysis::AcvMethod::Direct));
}
void BM_AcvSerial(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(analysis::serial::sample_acv(x, 1.0, 500));
}
void BM_AcvFft(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(analysis::sample_acv(x, 1.0, 500, analysis::AcvMethod::Fft));
}

std::vector<std::vector<double>> segments(std::size_t count, std::size_t len) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(noise(len, k + 1));
  return out;
}

void BM_Periodogram(benchmark::State& state) {
  const auto p = segments(static_cast<std::size_t>(state.range(0)), 10000);
  for (auto _ : state)
    benchmark::DoNotOptimize(analysis::averaged_periodogram(p, 0.01, analysis::Window::Hann));
}
void BM_PeriodogramSerial(benchmark::State& state) {
  const auto p = segments(static_cast<std::size_t>(state.range(0)), 10000);
  for (auto _ : state)
    benchmark::DoNotOptimize(analysis::serial::averaged_periodogram(p, 0.01, analysis::Window::Hann));
}

void BM_Kde(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(analysis::kde(x, 512));
}
void BM_KdeSerial(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(analysis::serial::kde(x, 512));
}

IntegratorConfig ensemble_config() {
  auto cfg = hopf::stationary_config(kHopf, 10, 1e-3, 10, 5);
  cfg.initial_state = {kHopf.r, 0.0};
  return cfg;
}

void BM_Ensemble(benchmark::State& state) {
  const auto sys = hopf::hopf_system(kHopf);
  const auto cfg = ensemble_config();
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_ensemble(sys, cfg, static_cast<std::size_t>(state.range(0))));
}
void BM_EnsembleSerial(benchmark::State& state) {
  const auto sys = hopf::hopf_system(kHopf);
  const auto cfg = ensemble_config();
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::integrate_ensemble(sys, cfg, static_cast<std::size_t>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_AcvDirect)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AcvSerial)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AcvFft)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Periodogram)->Arg(16)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PeriodogramSerial)->Arg(16)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Kde)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
