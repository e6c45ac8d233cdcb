#include "energytwin/planning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "energytwin/errors.hpp"
#include "energytwin/lp.hpp"

namespace energytwin {

std::string_view to_string(BranchLabel label) {
  switch (label) {
    case BranchLabel::Pessimistic: return "PESSIMISTIC";
    case BranchLabel::Median: return "MEDIAN";
    case BranchLabel::Optimistic: return "OPTIMISTIC";
  }
  return "UNKNOWN";
}

ScenarioTree build_scenario_tree(const ForecastBundle& b) {
  ScenarioTree tree;
  tree.branches[0] = {BranchLabel::Pessimistic, 0.25, b.load_q95, b.pv_q05};
  tree.branches[1] = {BranchLabel::Median, 0.50, b.load_q50, b.pv_q50};
  tree.branches[2] = {BranchLabel::Optimistic, 0.25, b.load_q05, b.pv_q95};
  return tree;
}

double StepAction::total_charge() const { return std::accumulate(charge_kw.begin(), charge_kw.end(), 0.0); }
double StepAction::total_discharge() const {
  return std::accumulate(discharge_kw.begin(), discharge_kw.end(), 0.0);
}

double StepAction::balance_residual(double load_kw, double pv_kw) const {
  return pv_kw + total_discharge() + import_kw - load_kw - total_charge() - export_kw;
}

void PlannerConfig::validate() const {
  if (replan_every_ticks < 1) throw ValidationError("planner.replanEveryTicks", "must be at least 1");
  if (horizon_ticks < replan_every_ticks)
    throw ValidationError("planner.horizonTicks", "must be at least replanEveryTicks");
  if (activation_tick < 0) throw ValidationError("planner.activationTick", "must be non-negative");
  if (!(import_cost_per_kwh > 0.0)) throw ValidationError("planner.importCostPerKwh", "must be positive");
  if (!(degradation_cost_per_kwh > 0.0))
    throw ValidationError("planner.degradationCostPerKwh", "must be positive");
  if (!(degradation_cost_per_kwh < import_cost_per_kwh))
    throw ValidationError("planner.degradationCostPerKwh", "must be below importCostPerKwh");
  if (!(export_value_per_kwh >= 0.0 && export_value_per_kwh < import_cost_per_kwh))
    throw ValidationError("planner.exportValuePerKwh", "must be in [0, importCostPerKwh)");
  if (storage_value_per_kwh && !(*storage_value_per_kwh >= 0.0))
    throw ValidationError("planner.storageValuePerKwh", "must be non-negative");
}

// ---------------------------------------------------------------------------

DispatchPlan solve_median_lp(const ScenarioBranch& median, const std::vector<BatteryState>& initial,
                             const std::vector<BatteryParams>& batteries, const ExternalSupplyParams& external,
                             const PlannerConfig& config, double dt) {
  const std::size_t horizon = median.load_kw.size();
  const std::size_t nb = batteries.size();
  if (horizon == 0) throw InvalidParameter("LP horizon must be at least one step");
  if (median.pv_kw.size() != horizon) throw InvalidParameter("load and PV trajectories differ in length");
  if (initial.size() != nb) throw InvalidParameter("one initial state per battery required");
  for (std::size_t b = 0; b < nb; ++b) {
    const double e = initial[b].stored_kwh;
    if (e < batteries[b].min_energy_kwh() - kEnergyToleranceKwh ||
        e > batteries[b].max_energy_kwh() + kEnergyToleranceKwh)
      throw InvalidParameter("initial state of charge outside the SoC band");
  }

  lp::LinearProgram prog;
  struct StepVars {
    std::vector<std::size_t> ch, dis, energy;
    std::size_t imp = 0, exp = 0;
  };
  std::vector<StepVars> vars(horizon);
  const double v = config.terminal_value();

  for (std::size_t k = 0; k < horizon; ++k) {
    StepVars& s = vars[k];
    for (std::size_t b = 0; b < nb; ++b) {
      const double pmax = batteries[b].max_power_kw();
      s.ch.push_back(prog.add_variable(config.degradation_cost_per_kwh * dt, 0.0, pmax));
      s.dis.push_back(prog.add_variable(config.degradation_cost_per_kwh * dt, 0.0, pmax));
    }
    s.imp = prog.add_variable(config.import_cost_per_kwh * dt, 0.0, external.capacity_kw);
    s.exp = prog.add_variable(-config.export_value_per_kwh * dt, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      const BatteryParams& p = batteries[b];
      // Self-discharge alone may carry a battery sitting on its floor below
      // it; the simulator tolerates that drift, so the LP must too.
      const double decay = std::pow(1.0 - p.self_discharge_per_tick * dt, static_cast<double>(k + 1));
      const double lower = std::min(p.min_energy_kwh(), initial[b].stored_kwh * decay);
      const double upper = std::max(p.max_energy_kwh(), initial[b].stored_kwh);
      const double cost = (k + 1 == horizon) ? -v : 0.0;
      s.energy.push_back(prog.add_variable(cost, lower, upper));
    }
  }

  for (std::size_t k = 0; k < horizon; ++k) {
    const StepVars& s = vars[k];
    std::vector<lp::LinearProgram::Term> balance;
    for (std::size_t b = 0; b < nb; ++b) {
      balance.emplace_back(s.dis[b], 1.0);
      balance.emplace_back(s.ch[b], -1.0);
    }
    balance.emplace_back(s.imp, 1.0);
    balance.emplace_back(s.exp, -1.0);
    prog.add_row(std::move(balance), lp::Sense::Equal, median.load_kw[k] - median.pv_kw[k]);

    for (std::size_t b = 0; b < nb; ++b) {
      const BatteryParams& p = batteries[b];
      const double keep = 1.0 - p.self_discharge_per_tick * dt;
      std::vector<lp::LinearProgram::Term> soc{{s.energy[b], 1.0},
                                               {s.ch[b], -p.eta_charge * dt},
                                               {s.dis[b], dt / p.eta_discharge}};
      double rhs = 0.0;
      if (k == 0)
        rhs = keep * initial[b].stored_kwh;
      else
        soc.emplace_back(vars[k - 1].energy[b], -keep);
      prog.add_row(std::move(soc), lp::Sense::Equal, rhs);
    }
  }

  const lp::Solution sol = lp::solve(prog);
  auto clean = [](double x) { return std::abs(x) < 1e-9 ? 0.0 : x; };

  DispatchPlan plan;
  plan.objective = sol.objective;
  plan.pivots = sol.pivots;
  for (std::size_t k = 0; k < horizon; ++k) {
    const StepVars& s = vars[k];
    StepAction a = StepAction::idle(nb);
    std::vector<double> soc(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      a.charge_kw[b] = clean(sol.x[s.ch[b]]);
      a.discharge_kw[b] = clean(sol.x[s.dis[b]]);
      soc[b] = 100.0 * sol.x[s.energy[b]] / batteries[b].capacity_kwh;
      if (a.charge_kw[b] > 1e-7 && a.discharge_kw[b] > 1e-7)
        throw InvariantViolation("LP plan charges and discharges in the same step");
    }
    a.import_kw = clean(sol.x[s.imp]);
    a.export_kw = clean(sol.x[s.exp]);
    if (a.import_kw > 1e-7 && a.export_kw > 1e-7)
      throw InvariantViolation("LP plan imports and exports in the same step");
    if (std::abs(a.balance_residual(median.load_kw[k], median.pv_kw[k])) > 1e-6)
      throw InvariantViolation("LP plan violates the power balance");
    plan.steps.push_back(std::move(a));
    plan.soc_trajectory_percent.push_back(std::move(soc));
  }
  return plan;
}

// ---------------------------------------------------------------------------

StepAction baseline_step(double load_kw, double pv_kw, const std::vector<BatteryState>& states,
                         const std::vector<BatteryParams>& batteries, const ExternalSupplyParams& external,
                         double dt) {
  StepAction a = StepAction::idle(batteries.size());
  const double net = load_kw - pv_kw;
  if (net < 0.0) {
    double surplus = -net;
    for (std::size_t b = 0; b < batteries.size(); ++b) {
      const double c = std::min(surplus, max_charge_kw(states[b], dt, batteries[b]));
      a.charge_kw[b] = c;
      surplus -= c;
    }
    a.export_kw = surplus;
  } else if (net > 0.0) {
    double deficit = net;
    for (std::size_t b = 0; b < batteries.size(); ++b) {
      const double d = std::min(deficit, max_discharge_kw(states[b], dt, batteries[b]));
      a.discharge_kw[b] = d;
      deficit -= d;
    }
    a.import_kw = external_draw(deficit, external, dt).delivered_kw;
  }
  return a;
}

// ---------------------------------------------------------------------------

RollingPlanner::RollingPlanner(PlannerConfig config, std::vector<BatteryParams> batteries,
                               ExternalSupplyParams external, ForecastSource source, std::int64_t run_end)
    : config_(std::move(config)),
      batteries_(std::move(batteries)),
      external_(external),
      source_(std::move(source)),
      run_end_(run_end) {
  config_.validate();
}

bool RollingPlanner::is_replan_tick(Tick t) const {
  return t.index >= config_.activation_tick &&
         (t.index - config_.activation_tick) % config_.replan_every_ticks == 0;
}

RollingDecision RollingPlanner::rolling_step(const PlantView& view) {
  const Tick t = view.tick;
  if (t.index < config_.activation_tick)
    throw InvariantViolation("planner called at tick " + std::to_string(t.index) + " before activation");

  RollingDecision out;
  auto fallback = [&] {
    out.action = baseline_step(view.load_kw, view.pv_kw, view.batteries, batteries_, external_);
    out.fallback = true;
    return out;
  };

  if (is_replan_tick(t)) {
    plan_.reset();
    const int horizon =
        static_cast<int>(std::min<std::int64_t>(config_.horizon_ticks, std::max<std::int64_t>(1, run_end_ - t.index)));
    try {
      out.forecast = source_(t, horizon);
    } catch (const InsufficientHistory&) {
      return fallback();
    }
    out.tree = build_scenario_tree(*out.forecast);
    DispatchPlan plan =
        solve_median_lp(out.tree->median(), view.batteries, batteries_, external_, config_);
    plan.origin = t;
    plan_ = std::move(plan);
    out.replanned = true;
  }

  if (!plan_) return fallback();
  const std::int64_t offset = t.index - plan_->origin.index;
  if (offset < 0 || offset >= static_cast<std::int64_t>(plan_->steps.size())) return fallback();
  out.offset = static_cast<int>(offset);
  out.action = plan_->steps[static_cast<std::size_t>(offset)];
  return out;
}

}  // namespace energytwin
