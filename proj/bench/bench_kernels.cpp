// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "nlmimo/bussgang.hpp"
#include "nlmimo/kernels.hpp"
#include "nlmimo/receiver.hpp"
#include "nlmimo/rng.hpp"

namespace {

using namespace nlmimo;

const NonlinearChain& cascade() {
  static const NonlinearChain c = make_cascade(1.4, 4.2, 3);
  return c;
}

void BM_MomentsReference(benchmark::State& state) {
  const NormalizedChain chain(cascade());
  const ComplexMap g = [&](Complex y) { return chain(y); };
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::bussgang_moments_reference(g, 7, 1, n, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_MomentsParallel(benchmark::State& state) {
  const NormalizedChain chain(cascade());
  const ComplexMap g = [&](Complex y) { return chain(y); };
  const auto n = static_cast<std::size_t>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::bussgang_moments_blocked(g, 7, 1, n, 1.0, workers));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

std::vector<Complex> samples(std::size_t n) {
  const CounterRng rng(3, 4);
  std::vector<Complex> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.complex_normal_at(i);
  return v;
}

void BM_ChainReference(benchmark::State& state) {
  const NormalizedChain chain(cascade());
  const auto in = samples(static_cast<std::size_t>(state.range(0)));
  std::vector<Complex> out(in.size());
  for (auto _ : state) {
    kernels::chain_apply_reference(in, out, chain, 1.0, 1.0);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * in.size());
}

void BM_ChainParallel(benchmark::State& state) {
  const NormalizedChain chain(cascade());
  const auto in = samples(static_cast<std::size_t>(state.range(0)));
  std::vector<Complex> out(in.size());
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    kernels::chain_apply_parallel(in, out, chain, 1.0, 1.0, workers);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * in.size());
}

Scenario bench_scenario() {
  Scenario s;
  s.geometry = ArrayGeometry(64, 0.5, kSpeedOfLight / 140e9);
  s.num_users = 8;
  s.snr_edge_db = 10.0;
  return s;
}

void BM_BerReference(benchmark::State& state) {
  const auto model = fit_chain(cascade(), 100000, 1, 1);
  SimulationConfig sim;
  sim.n_symbols = 4096;
  sim.n_drops = 4;
  sim.seed = 11;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ber_monte_carlo_reference(bench_scenario(), model, sim));
  }
}

void BM_BerParallel(benchmark::State& state) {
  const auto model = fit_chain(cascade(), 100000, 1, 1);
  SimulationConfig sim;
  sim.n_symbols = 4096;
  sim.n_drops = 4;
  sim.seed = 11;
  sim.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ber_monte_carlo(bench_scenario(), model, sim));
  }
}

}  // namespace

BENCHMARK(BM_MomentsReference)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentsParallel)->Args({1 << 18, 1})->Args({1 << 18, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainReference)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainParallel)->Args({1 << 18, 1})->Args({1 << 18, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BerReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BerParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
