#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing in here calls into the solver or the controller being checked.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "energytwin/physics.hpp"
#include "energytwin/planning.hpp"

namespace energytwin::testing {

// One battery, horizon of one or two steps.
struct LpInstance {
  std::vector<double> load_kw;
  std::vector<double> pv_kw;
  BatteryParams battery;
  double initial_kwh = 0.0;
  ExternalSupplyParams external;
  PlannerConfig planner;
};

struct BruteForceResult {
  double objective = std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::vector<double> battery_kw;  // +discharge / -charge per step
};

// Enumerates battery power on an integer kW grid, one step after the other.
// Import and export follow from the balance; the storage recursion and
// bounds are the linear model the planner is meant to solve.
inline BruteForceResult brute_force_lp(const LpInstance& in) {
  const std::size_t horizon = in.load_kw.size();
  const BatteryParams& p = in.battery;
  const double keep = 1.0 - p.self_discharge_per_tick;
  const double cap = std::floor(p.c_rate * p.capacity_kwh);
  const double v = in.planner.terminal_value();

  BruteForceResult best;
  std::vector<double> path(horizon, 0.0);

  auto recurse = [&](auto&& self, std::size_t k, double energy, double cost) -> void {
    if (k == horizon) {
      const double total = cost - v * energy;
      if (total < best.objective) {
        best.objective = total;
        best.feasible = true;
        best.battery_kw = path;
      }
      return;
    }
    const double lo = std::min(p.min_energy_kwh(), in.initial_kwh * std::pow(keep, static_cast<double>(k + 1)));
    const double hi = std::max(p.max_energy_kwh(), in.initial_kwh);
    for (double q = -cap; q <= cap; q += 1.0) {
      const double ch = q < 0 ? -q : 0.0;
      const double dis = q > 0 ? q : 0.0;
      const double next = keep * energy + p.eta_charge * ch - dis / p.eta_discharge;
      if (next < lo - 1e-9 || next > hi + 1e-9) continue;
      const double net = in.load_kw[k] - in.pv_kw[k] - dis + ch;
      const double imp = std::max(0.0, net);
      const double exp = std::max(0.0, -net);
      if (imp > in.external.capacity_kw + 1e-9) continue;
      const double step = in.planner.import_cost_per_kwh * imp +
                          in.planner.degradation_cost_per_kwh * (ch + dis) -
                          in.planner.export_value_per_kwh * exp;
      path[k] = q;
      self(self, k + 1, next, cost + step);
    }
  };
  recurse(recurse, 0, in.initial_kwh, 0.0);
  return best;
}

// Worst-case objective loss from moving each step's battery power by less
// than one grid cell: one kW more or less import plus degradation, and the
// matching change in the energy left at the end.
inline double grid_gap(const LpInstance& in) {
  const BatteryParams& p = in.battery;
  const double per_step = in.planner.import_cost_per_kwh + in.planner.degradation_cost_per_kwh +
                          in.planner.terminal_value() * std::max(p.eta_charge, 1.0 / p.eta_discharge);
  return per_step * static_cast<double>(in.load_kw.size());
}

inline LpInstance random_lp_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> horizon(1, 2);
  LpInstance in;
  in.battery.capacity_kwh = std::round(20.0 + 40.0 * u01(rng));
  in.battery.c_rate = 0.5 + 0.5 * u01(rng);
  in.battery.eta_charge = 0.85 + 0.15 * u01(rng);
  in.battery.eta_discharge = 0.85 + 0.15 * u01(rng);
  in.battery.self_discharge_per_tick = 0.002 * u01(rng);
  in.battery.soc_min_percent = std::round(20.0 * u01(rng));
  in.battery.soc_max_percent = 100.0 - std::round(20.0 * u01(rng));
  in.initial_kwh = in.battery.min_energy_kwh() +
                   u01(rng) * (in.battery.max_energy_kwh() - in.battery.min_energy_kwh());
  in.external.capacity_kw = std::round(20.0 + 80.0 * u01(rng));
  in.external.unit_cost = 0.1 + 0.2 * u01(rng);
  in.planner.import_cost_per_kwh = in.external.unit_cost;
  in.planner.degradation_cost_per_kwh = 0.01 * in.external.unit_cost * (1.0 + 4.0 * u01(rng));
  in.planner.export_value_per_kwh = u01(rng) < 0.5 ? 0.0 : 0.5 * in.planner.degradation_cost_per_kwh;
  if (u01(rng) < 0.3) in.planner.storage_value_per_kwh = 0.0;
  const int h = horizon(rng);
  for (int k = 0; k < h; ++k) {
    in.load_kw.push_back(std::round(60.0 * u01(rng)));
    in.pv_kw.push_back(u01(rng) < 0.4 ? 0.0 : std::round(80.0 * u01(rng)));
  }
  // Keep the import slack sufficient so every instance is feasible.
  const double worst = *std::max_element(in.load_kw.begin(), in.load_kw.end()) + in.battery.max_power_kw();
  in.external.capacity_kw = std::max(in.external.capacity_kw, std::ceil(worst));
  return in;
}

// Largest |balance residual| over a plan's steps.
inline double worst_balance(const DispatchPlan& plan, const LpInstance& in) {
  double worst = 0.0;
  for (std::size_t k = 0; k < plan.steps.size(); ++k)
    worst = std::max(worst, std::abs(plan.steps[k].balance_residual(in.load_kw[k], in.pv_kw[k])));
  return worst;
}

// Charges an empty battery with random powers, then drains it at full rate.
// Returns {energy drawn from the bus while charging, energy delivered back}.
struct RoundTrip {
  double charged_kwh = 0.0;
  double delivered_kwh = 0.0;
};

inline RoundTrip random_round_trip(std::mt19937_64& rng, const BatteryParams& p) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> steps(1, 12);
  BatteryState s{p.min_energy_kwh()};
  RoundTrip out;
  const int n = steps(rng);
  for (int i = 0; i < n; ++i) {
    const double want = u01(rng) * p.max_power_kw();
    const double ch = std::min(want, max_charge_kw(s, 1.0, p));
    s = step_battery(s, ch, 0.0, 1.0, p).state;
    out.charged_kwh += ch;
  }
  for (int guard = 0; guard < 10000; ++guard) {
    const double d = max_discharge_kw(s, 1.0, p);
    if (d < 1e-12) break;
    s = step_battery(s, 0.0, d, 1.0, p).state;
    out.delivered_kwh += d;
  }
  return out;
}

}  // namespace energytwin::testing
