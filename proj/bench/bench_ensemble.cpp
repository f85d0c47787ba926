#include <benchmark/benchmark.h>

#include "harnack/drift.hpp"
#include "harnack/config.hpp"
#include "harnack/sde.hpp"
#include "harnack/spectral_model.hpp"

namespace {

using namespace harnack;

struct Fixture {
  OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  Drift drift = Drift::cubic_kernel(power_profile(16, 1.0), 5.0, 0.0);
  std::vector<Vec> starts{unit_vector(16, 0)};
  TimeGrid grid{1.0, 64};
};

void BM_SimulateSerial(benchmark::State& state) {
  Fixture f;
  const NoisePlan plan(1, std::size_t(state.range(0)));
  for (auto _ : state) {
    auto ens = simulate_batch_serial(f.pair, f.drift, f.starts, f.grid, plan, Scheme::exponential, {f.grid.steps()});
    benchmark::DoNotOptimize(ens.front().raw().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateOpenMP(benchmark::State& state) {
  Fixture f;
  const NoisePlan plan(1, std::size_t(state.range(0)));
  for (auto _ : state) {
    auto ens = simulate_batch(f.pair, f.drift, f.starts, f.grid, plan, Scheme::exponential, {f.grid.steps()});
    benchmark::DoNotOptimize(ens.front().raw().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_SimulateSerial)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateOpenMP)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
