#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "energytwin/config.hpp"
#include "energytwin/forest.hpp"
#include "energytwin/microgrid.hpp"
#include "energytwin/planning.hpp"
#include "oracles.hpp"

using namespace energytwin;

namespace {

ScenarioConfig nominal(Mode mode) {
  ScenarioConfig cfg = load_config(std::string(ENERGYTWIN_CONFIG_DIR) + "/nominal.json");
  cfg.mode = mode;
  if (!cfg.planner) cfg.planner = cfg.effective_planner();
  return cfg;
}

void BM_MedianLp(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  std::mt19937_64 rng{1};
  std::uniform_real_distribution<double> u(0.0, 60.0);
  std::vector<double> load, pv;
  for (int k = 0; k < horizon; ++k) {
    load.push_back(u(rng));
    pv.push_back(u(rng));
  }
  const ScenarioBranch median{BranchLabel::Median, 0.5, load, pv};
  const ExternalSupplyParams external;
  const PlannerConfig planner;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_median_lp(median, {BatteryState{50.0}}, {BatteryParams{}}, external, planner));
  }
}
BENCHMARK(BM_MedianLp)->Arg(1)->Arg(4)->Arg(24);

void BM_BruteForceLp(benchmark::State& state) {
  std::mt19937_64 rng{8};
  const auto in = energytwin::testing::random_lp_instance(rng);
  for (auto _ : state) benchmark::DoNotOptimize(energytwin::testing::brute_force_lp(in));
}
BENCHMARK(BM_BruteForceLp);

void BM_ForestTrain(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng{3};
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset data(13);
  std::vector<double> x(13);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& v : x) v = noise(rng);
    data.add(x, 3.0 * x[0] - x[4] + 0.1 * noise(rng));
  }
  ForestConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(RandomForest::train(data, cfg, 7));
}
BENCHMARK(BM_ForestTrain)->Arg(75)->Arg(168);

void BM_Experiment(benchmark::State& state) {
  const ScenarioConfig cfg = nominal(state.range(0) ? Mode::Predictive : Mode::Baseline);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}
BENCHMARK(BM_Experiment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
