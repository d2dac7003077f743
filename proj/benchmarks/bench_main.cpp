#include <benchmark/benchmark.h>

#include "aoi/equilibrium.hpp"
#include "aoi/simulator.hpp"
#include "aoi/transient.hpp"

namespace {

std::vector<aoi::ClassSpec> two_classes(double h1, double h2) {
  return {{0.5, 0.9, h1}, {0.5, 0.2, h2}};
}

aoi::SimConfig sim_config(long long n, aoi::PolicySpec::Kind kind) {
  aoi::SimConfig cfg;
  cfg.network = aoi::NetworkSpec{{{0.5, 0.9, std::nullopt}, {0.5, 0.2, std::nullopt}}, n};
  cfg.policy.kind = kind;
  if (kind == aoi::PolicySpec::Kind::ThresholdRandom) {
    const auto thr = aoi::thresholds_linear(cfg.network.classes, 5e-4);
    for (double h : thr)
      cfg.policy.thresholds.push_back(aoi::unscale_to_slots(h, n));
  }
  cfg.horizon = 1;  // driven manually
  return cfg;
}

void BM_ThresholdPolicySlots(benchmark::State& state) {
  aoi::Simulator sim(sim_config(state.range(0), aoi::PolicySpec::Kind::ThresholdRandom));
  for (auto _ : state) sim.step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ThresholdPolicySlots)->Arg(100)->Arg(1000)->Arg(10000);

void BM_IndexPolicySlots(benchmark::State& state) {
  aoi::Simulator sim(sim_config(state.range(0), aoi::PolicySpec::Kind::Index));
  for (auto _ : state) sim.step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IndexPolicySlots)->Arg(100)->Arg(1000)->Arg(10000);

void BM_SolveEquilibrium(benchmark::State& state) {
  const auto classes = two_classes(1.5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(aoi::solve_equilibrium(classes));
}
BENCHMARK(BM_SolveEquilibrium);

void BM_TransientStep(benchmark::State& state) {
  const auto classes = two_classes(1.0, 1.0);
  auto sol = aoi::TransientSolution::init(
      classes, aoi::equilibrium_initializer(aoi::solve_equilibrium(classes)), 1e-3,
      aoi::TransientSolution::default_h_max(classes));
  for (auto _ : state) sol.step(1e-3);
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(sol.num_cells()));
}
BENCHMARK(BM_TransientStep);

void BM_MeanAgeValue(benchmark::State& state) {
  const auto eq = aoi::solve_equilibrium(two_classes(1.5, 3.0));
  const auto v = aoi::AgeFunction::power(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(aoi::mean_age_value(eq, v));
}
BENCHMARK(BM_MeanAgeValue);

}  // namespace

BENCHMARK_MAIN();
