#include <benchmark/benchmark.h>

#include <cmath>

#include "keyrate/channel.hpp"
#include "keyrate/key_rate.hpp"
#include "keyrate/optimizer.hpp"
#include "keyrate/oracles.hpp"

namespace {

keyrate::IntensityProfile make_profile(int k) {
  std::vector<double> mu(k), p(k, 1.0 / k);
  for (int n = 0; n < k; ++n) mu[n] = 0.1 * (k - 1 - n) + 1e-6;
  double acc = 0.0;
  for (int n = 0; n + 1 < k; ++n) acc += p[n];
  p[k - 1] = 1.0 - acc;
  return keyrate::IntensityProfile(std::move(mu), std::move(p));
}

void BM_ComputeCoefficients(benchmark::State& state) {
  const auto profile = make_profile(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(keyrate::compute_coefficients(profile));
  }
}
BENCHMARK(BM_ComputeCoefficients)->DenseRange(3, 8);

void BM_KeyRate(benchmark::State& state) {
  const keyrate::ChannelParams channel;
  const auto profile = make_profile(static_cast<int>(state.range(0)));
  const auto observed = keyrate::observe(channel, profile);
  keyrate::SecurityBudget budget;
  budget.eps_sec = 1e-10;
  budget.eps_cor = 1e-15;
  for (auto _ : state) {
    benchmark::DoNotOptimize(keyrate::key_rate(profile, observed, 0.9, 1e9, budget));
  }
}
BENCHMARK(BM_KeyRate)->DenseRange(3, 6);

void BM_FixedPoint(benchmark::State& state) {
  const keyrate::ChannelParams channel;
  const auto profile = make_profile(3);
  const auto observed = keyrate::observe(channel, profile);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        keyrate::solve_security_fixed_point(profile, observed, 0.9, 1e9, 1e-15, 1e-15));
  }
}
BENCHMARK(BM_FixedPoint);

void BM_OptimizeCell(benchmark::State& state) {
  const keyrate::ChannelParams channel;
  keyrate::OptimizationConfig cfg;
  cfg.k = static_cast<int>(state.range(0));
  cfg.s_x = 1e9;
  cfg.restarts = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(keyrate::optimize(channel, cfg, 1e-15, 1e-15));
  }
}
BENCHMARK(BM_OptimizeCell)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ValidityTrials(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(keyrate::bound_validity_check(100, 5, 1));
  }
}
BENCHMARK(BM_ValidityTrials)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
