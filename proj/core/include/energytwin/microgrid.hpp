#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "energytwin/config.hpp"
#include "energytwin/forecasting.hpp"
#include "energytwin/kernel.hpp"
#include "energytwin/metrics.hpp"
#include "energytwin/negotiation.hpp"
#include "energytwin/planning.hpp"

namespace energytwin {

namespace agent_names {
inline constexpr const char* kAggregator = "Aggregator";
inline constexpr const char* kCampusBuilding = "CampusBuilding";
inline constexpr const char* kExternalGrid = "ExternalGrid";
inline constexpr const char* kForecaster = "Forecaster";
inline constexpr const char* kMainBattery = "MainBattery";
inline constexpr const char* kPvMain = "PVMain";
inline constexpr const char* kWeather = "Weather";
}  // namespace agent_names

enum class ControllerUsed { Baseline, Predictive, Fallback };

std::string_view to_string(ControllerUsed c);

/// What the aggregator decided and what actually settled in one tick.
struct ControlRecord {
  Tick tick;
  ControllerUsed controller = ControllerUsed::Baseline;
  bool replanned = false;
  double planned_charge_kw = 0.0;
  double planned_discharge_kw = 0.0;
  double charge_kw = 0.0;
  double discharge_kw = 0.0;
  double import_kw = 0.0;
  double curtailed_kw = 0.0;
  double unmet_kw = 0.0;
};

struct ExperimentLog {
  std::vector<TickReport> reports;
  std::vector<WeatherSample> weather;
  std::vector<ControlRecord> control;
  std::vector<DispatchPlan> plans;
  std::vector<ScenarioTree> trees;  // parallel to plans
  std::vector<ForecastBundle> forecasts;
  std::vector<NegotiationRound> negotiations;
};

struct ExperimentResult {
  ScenarioConfig config;
  ExperimentLog log;
  std::vector<TickRecord> records;
  std::vector<ForecastPoint> forecast_points;
  MetricsReport metrics;
};

/// The campus microgrid: weather, PV array, building load, one battery, the
/// external grid, a forecaster and the aggregator, on one orchestrator.
class Microgrid {
 public:
  explicit Microgrid(ScenarioConfig config);
  ~Microgrid();
  Microgrid(const Microgrid&) = delete;
  Microgrid& operator=(const Microgrid&) = delete;

  TickReport step();
  bool finished() const;

  Orchestrator& orchestrator();
  const ScenarioConfig& config() const;
  const ExperimentLog& log() const;
  const BatteryState& battery_state() const;

  /// Computes metrics over everything run so far. Values go through the same
  /// fixed-decimal rounding as the CSV logs.
  ExperimentResult result() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Post-run sanity checks: registry completeness, SoC band, non-negative
/// flows, one-sided battery use, well-formed forecasts. Empty means clean.
std::vector<std::string> check_run_invariants(const ExperimentResult& result);

/// Runs the whole scenario.
ExperimentResult run_experiment(const ScenarioConfig& config);

/// Writes run.csv, plan.csv, negotiation.csv, forecast.csv, metrics.txt,
/// metrics.csv, plus config.json, weather.csv, control.csv, scenarios.csv and
/// plot data under plots/.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Rebuilds the metrics from a directory written by write_outputs.
MetricsReport metrics_from_logs(const std::filesystem::path& dir);

/// First-step median forecasts from forecast.csv.
std::vector<ForecastPoint> read_forecast_points(std::istream& in);

inline constexpr std::string_view kForecastLogHeader =
    "origin_tick,step,target_tick,load_q05,load_q50,load_q95,pv_q05,pv_q50,pv_q95";

}  // namespace energytwin
