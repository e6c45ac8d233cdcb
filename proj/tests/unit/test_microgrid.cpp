#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "energytwin/config.hpp"
#include "energytwin/microgrid.hpp"

using namespace energytwin;
namespace fs = std::filesystem;

namespace {

ScenarioConfig nominal(Mode mode, std::uint64_t seed = 1) {
  ScenarioConfig cfg = load_config(std::string(ENERGYTWIN_CONFIG_DIR) + "/nominal.json");
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("energytwin-test-" + name);
  fs::remove_all(p);
  return p;
}

// (tick, agent) -> (generation, consumption) from the run log
std::map<std::pair<std::int64_t, std::string>, std::pair<double, double>> flows(const ExperimentResult& r) {
  std::map<std::pair<std::int64_t, std::string>, std::pair<double, double>> out;
  for (const auto& rep : r.log.reports)
    for (const auto& u : rep.snapshot) out[{u.tick.index, u.agent.str()}] = {u.generation_kw, u.consumption_kw};
  return out;
}

class Runs : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    baseline = new ExperimentResult(run_experiment(nominal(Mode::Baseline)));
    predictive = new ExperimentResult(run_experiment(nominal(Mode::Predictive)));
  }
  static void TearDownTestSuite() {
    delete baseline;
    delete predictive;
  }
  static ExperimentResult* baseline;
  static ExperimentResult* predictive;
};

ExperimentResult* Runs::baseline = nullptr;
ExperimentResult* Runs::predictive = nullptr;

}  // namespace

TEST_F(Runs, OneRowPerAgentPerTick) {
  for (const auto* r : {baseline, predictive}) {
    ASSERT_EQ(r->log.reports.size(), 336u);
    for (const auto& rep : r->log.reports) EXPECT_EQ(rep.snapshot.size(), 7u);
  }
  const fs::path dir = scratch("rows");
  write_outputs(*baseline, dir);
  std::ifstream in(dir / "run.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 336u * 7u + 1u);
}

TEST_F(Runs, InvariantsHold) {
  EXPECT_TRUE(check_run_invariants(*baseline).empty());
  EXPECT_TRUE(check_run_invariants(*predictive).empty());
}

TEST_F(Runs, ExogenousSeriesIdenticalAcrossModes) {
  ASSERT_EQ(baseline->log.weather.size(), predictive->log.weather.size());
  for (std::size_t i = 0; i < baseline->log.weather.size(); ++i) {
    EXPECT_EQ(baseline->log.weather[i].ghi, predictive->log.weather[i].ghi);
    EXPECT_EQ(baseline->log.weather[i].ambient_temp_c, predictive->log.weather[i].ambient_temp_c);
  }
  const auto a = flows(*baseline), b = flows(*predictive);
  for (std::int64_t t = 0; t < 336; ++t) {
    EXPECT_EQ(a.at({t, "PVMain"}), b.at({t, "PVMain"}));
    EXPECT_EQ(a.at({t, "CampusBuilding"}), b.at({t, "CampusBuilding"}));
  }
  const fs::path da = scratch("exo-a"), db = scratch("exo-b");
  write_outputs(*baseline, da);
  write_outputs(*predictive, db);
  EXPECT_EQ(slurp(da / "weather.csv"), slurp(db / "weather.csv"));
}

TEST_F(Runs, WarmUpUsesTheBaselineRule) {
  const auto& c = predictive->log.control;
  ASSERT_EQ(c.size(), 336u);
  for (std::int64_t t = 0; t < 168; ++t) {
    EXPECT_EQ(c[t].controller, ControllerUsed::Baseline);
    EXPECT_EQ(c[t].charge_kw, baseline->log.control[t].charge_kw);
    EXPECT_EQ(c[t].discharge_kw, baseline->log.control[t].discharge_kw);
  }
  EXPECT_EQ(c[168].controller, ControllerUsed::Predictive);
  EXPECT_TRUE(c[168].replanned);
  EXPECT_FALSE(c[169].replanned);
  EXPECT_TRUE(c[170].replanned);
  EXPECT_EQ(predictive->log.plans.size(), 84u);
  EXPECT_EQ(predictive->log.plans.front().origin, Tick{168});
}

TEST_F(Runs, SettledFlowsNeverExceedThePlan) {
  for (const auto& c : predictive->log.control) {
    if (c.controller != ControllerUsed::Predictive) continue;
    EXPECT_LE(c.charge_kw, c.planned_charge_kw + 1e-9) << c.tick;
    EXPECT_LE(c.discharge_kw, c.planned_discharge_kw + 1e-9) << c.tick;
  }
}

TEST_F(Runs, EveryCfpAnsweredByBothResponders) {
  for (const auto* r : {baseline, predictive}) {
    ASSERT_FALSE(r->log.negotiations.empty());
    for (const auto& round : r->log.negotiations) {
      ASSERT_EQ(round.responses.size(), 2u);
      EXPECT_EQ(responder_of(round.responses[0]).str(), "ExternalGrid");
      EXPECT_EQ(responder_of(round.responses[1]).str(), "MainBattery");
      EXPECT_LE(round.award.total_kw(), round.cfp.quantity_kw + 1e-9);
    }
  }
}

TEST_F(Runs, ForecastsAreWellFormed) {
  EXPECT_EQ(predictive->log.forecasts.size(), 84u);
  for (const auto& f : predictive->log.forecasts) {
    EXPECT_EQ(f.horizon, std::min<std::int64_t>(4, 336 - f.origin.index));
    EXPECT_TRUE(f.well_formed());
  }
  EXPECT_TRUE(baseline->log.forecasts.empty());
  EXPECT_FALSE(baseline->metrics.load_mae_kw.has_value());
}

TEST_F(Runs, MetricsRecomputedFromLogsMatch) {
  for (const auto* r : {baseline, predictive}) {
    const fs::path dir = scratch("recompute");
    write_outputs(*r, dir);
    const MetricsReport off = metrics_from_logs(dir);
    EXPECT_NEAR(off.final_cebr_percent, r->metrics.final_cebr_percent, 1e-9);
    EXPECT_NEAR(off.mean_iebr_post_activation_percent, r->metrics.mean_iebr_post_activation_percent, 1e-9);
    EXPECT_NEAR(off.avg_soc_post_activation_percent, r->metrics.avg_soc_post_activation_percent, 1e-9);
    EXPECT_NEAR(off.bri_at_least_50_percent, r->metrics.bri_at_least_50_percent, 1e-9);
    EXPECT_NEAR(off.scarcity_proxy_percent, r->metrics.scarcity_proxy_percent, 1e-9);
    EXPECT_NEAR(off.equivalent_full_cycles, r->metrics.equivalent_full_cycles, 1e-9);
    EXPECT_EQ(off.load_mae_kw.has_value(), r->metrics.load_mae_kw.has_value());
    if (off.load_mae_kw) {
      EXPECT_NEAR(*off.load_mae_kw, *r->metrics.load_mae_kw, 1e-9);
      EXPECT_NEAR(*off.pv_mae_kw, *r->metrics.pv_mae_kw, 1e-9);
    }
  }
}

TEST_F(Runs, OutputFilesPresent) {
  const fs::path dir = scratch("files");
  write_outputs(*predictive, dir);
  for (const char* f : {"run.csv", "plan.csv", "negotiation.csv", "forecast.csv", "metrics.txt", "metrics.csv",
                        "config.json", "weather.csv", "control.csv", "scenarios.csv", "plots/cebr.csv",
                        "plots/iebr.csv", "plots/soc.csv", "plots/forecast_error.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::ifstream plan(dir / "plan.csv");
  std::string header;
  std::getline(plan, header);
  EXPECT_EQ(header, "tick,step,objective,charge_kw,discharge_kw,import_kw,export_kw,projected_soc_percent");
}

TEST(Determinism, SameSeedSameBytes) {
  const ScenarioConfig cfg = nominal(Mode::Predictive, 4);
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  write_outputs(run_experiment(cfg), a);
  write_outputs(run_experiment(cfg), b);
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
  }
}

TEST(Determinism, SeedsDiffer) {
  ScenarioConfig cfg = nominal(Mode::Baseline, 1);
  const auto a = run_experiment(cfg);
  cfg.seed = 2;
  const auto b = run_experiment(cfg);
  EXPECT_NE(a.log.weather[12].ghi, b.log.weather[12].ghi);
}

TEST(Disturbances, OutageOnlyTouchesItsWindow) {
  ScenarioConfig cfg = nominal(Mode::Baseline, 3);
  const auto base = run_experiment(cfg);
  cfg.disturbance = preset_disturbance(ScenarioPreset::PvOutage);
  const auto hit = run_experiment(cfg);
  const auto a = flows(base), b = flows(hit);
  for (std::int64_t t = 0; t < 336; ++t) {
    EXPECT_EQ(base.log.weather[t].ghi, hit.log.weather[t].ghi);
    EXPECT_EQ(a.at({t, "CampusBuilding"}), b.at({t, "CampusBuilding"}));
    if (t < 200)
      EXPECT_EQ(a.at({t, "PVMain"}), b.at({t, "PVMain"}));
    else
      EXPECT_EQ(b.at({t, "PVMain"}).first, 0.0);
  }
  // Nothing differs at all before the outage.
  for (std::int64_t t = 0; t < 200; ++t) EXPECT_EQ(a.at({t, "MainBattery"}), b.at({t, "MainBattery"}));
}

TEST(Disturbances, SpikeDoublesLoadInsideTheWindow) {
  ScenarioConfig cfg = nominal(Mode::Baseline, 3);
  const auto base = run_experiment(cfg);
  cfg.disturbance = preset_disturbance(ScenarioPreset::LoadSpike);
  const auto hit = run_experiment(cfg);
  const auto a = flows(base), b = flows(hit);
  for (std::int64_t t = 0; t < 336; ++t) {
    const double expected = (t >= 200 && t <= 260 ? 2.0 : 1.0) * a.at({t, "CampusBuilding"}).second;
    EXPECT_NEAR(b.at({t, "CampusBuilding"}).second, expected, 1e-12);
    EXPECT_EQ(a.at({t, "PVMain"}), b.at({t, "PVMain"}));
  }
}

TEST(Stepping, MicrogridAdvancesTickByTick) {
  Microgrid grid(nominal(Mode::Baseline));
  EXPECT_FALSE(grid.finished());
  const auto r0 = grid.step();
  EXPECT_EQ(r0.tick, Tick{0});
  EXPECT_EQ(r0.snapshot.size(), 7u);
  EXPECT_NEAR(grid.battery_state().stored_kwh,
              grid.orchestrator().registry().query(AgentId{"MainBattery"}).stored_kwh, 1e-12);
  EXPECT_EQ(grid.orchestrator().current_tick(), Tick{1});
}
