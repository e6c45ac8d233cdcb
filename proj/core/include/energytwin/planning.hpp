#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "energytwin/forecasting.hpp"
#include "energytwin/physics.hpp"
#include "energytwin/types.hpp"

namespace energytwin {

enum class BranchLabel { Pessimistic, Median, Optimistic };

std::string_view to_string(BranchLabel label);

struct ScenarioBranch {
  BranchLabel label = BranchLabel::Median;
  double probability = 0.0;
  std::vector<double> load_kw;
  std::vector<double> pv_kw;
};

struct ScenarioTree {
  std::array<ScenarioBranch, 3> branches;  // pessimistic, median, optimistic

  const ScenarioBranch& median() const { return branches[1]; }
};

/// Pessimistic: load q95 with PV q05. Optimistic: load q05 with PV q95.
/// Probabilities 0.25 / 0.50 / 0.25.
ScenarioTree build_scenario_tree(const ForecastBundle& bundle);

struct StepAction {
  std::vector<double> charge_kw;     // per battery
  std::vector<double> discharge_kw;  // per battery
  double import_kw = 0.0;
  double export_kw = 0.0;

  static StepAction idle(std::size_t batteries) {
    return StepAction{std::vector<double>(batteries, 0.0), std::vector<double>(batteries, 0.0), 0.0, 0.0};
  }
  double total_charge() const;
  double total_discharge() const;

  /// pv + discharge + import - load - charge - export
  double balance_residual(double load_kw, double pv_kw) const;
};

struct DispatchPlan {
  Tick origin;
  std::vector<StepAction> steps;
  double objective = 0.0;
  std::vector<std::vector<double>> soc_trajectory_percent;  // [step][battery], end of step
  std::size_t pivots = 0;
};

struct PlannerConfig {
  int horizon_ticks = 4;
  int replan_every_ticks = 2;
  std::int64_t activation_tick = 168;
  double import_cost_per_kwh = 0.20;
  double degradation_cost_per_kwh = 0.002;
  double export_value_per_kwh = 0.0;
  /// Value credited per kWh left in storage at the end of the horizon. Unset
  /// means "same as import cost". Zero gives a purely myopic horizon.
  std::optional<double> storage_value_per_kwh;

  double terminal_value() const { return storage_value_per_kwh.value_or(import_cost_per_kwh); }
  void validate() const;
};

/// Exact LP over the median branch. Variables per step: charge and discharge
/// per battery, import, export and end-of-step stored energy. Throws
/// InfeasibleLP / UnboundedLP, and InvariantViolation if the optimum breaks
/// balance or mutual exclusion.
DispatchPlan solve_median_lp(const ScenarioBranch& median, const std::vector<BatteryState>& initial,
                             const std::vector<BatteryParams>& batteries, const ExternalSupplyParams& external,
                             const PlannerConfig& config, double dt_hours = kTickHours);

/// Myopic rule: surplus charges batteries (in order) and the rest is
/// exported; deficits discharge batteries and import the rest up to
/// capacity. Whatever is left uncovered stays as a negative balance residual.
StepAction baseline_step(double load_kw, double pv_kw, const std::vector<BatteryState>& states,
                         const std::vector<BatteryParams>& batteries, const ExternalSupplyParams& external,
                         double dt_hours = kTickHours);

/// What the controller sees at decision time.
struct PlantView {
  Tick tick;
  double load_kw = 0.0;
  double pv_kw = 0.0;
  std::vector<BatteryState> batteries;
};

using ForecastSource = std::function<ForecastBundle(Tick origin, int horizon)>;

struct RollingDecision {
  StepAction action;  // before execution clamping
  bool replanned = false;
  bool fallback = false;  // baseline rule used because forecasts were unavailable
  int offset = 0;         // step of the cached plan that was returned
  std::optional<ForecastBundle> forecast;
  std::optional<ScenarioTree> tree;
};

/// Receding-horizon executor. Re-solves when (t - activation) is a multiple
/// of the replan interval and otherwise replays the cached plan. Horizons are
/// truncated at `run_end`.
class RollingPlanner {
 public:
  RollingPlanner(PlannerConfig config, std::vector<BatteryParams> batteries, ExternalSupplyParams external,
                 ForecastSource source, std::int64_t run_end);

  RollingDecision rolling_step(const PlantView& view);

  const std::optional<DispatchPlan>& cached_plan() const { return plan_; }
  const PlannerConfig& config() const { return config_; }
  bool is_replan_tick(Tick t) const;

 private:
  PlannerConfig config_;
  std::vector<BatteryParams> batteries_;
  ExternalSupplyParams external_;
  ForecastSource source_;
  std::int64_t run_end_;
  std::optional<DispatchPlan> plan_;
};

}  // namespace energytwin
