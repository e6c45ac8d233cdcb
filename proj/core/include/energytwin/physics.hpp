#pragma once

#include <array>
#include <functional>

#include "energytwin/random.hpp"
#include "energytwin/types.hpp"

namespace energytwin {

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

struct WeatherParams {
  int sunrise_tick = 6;
  int sunset_tick = 18;
  int peak_tick = 12;
  double g_peak = 1000.0;         // W/m2
  double temp_mean_day = 25.0;    // degC
  double temp_mean_night = 15.0;  // degC
  double sigma_g = 100.0;         // W/m2
  double sigma_t = 1.0;           // degC

  /// Throws InvalidParameter when the diurnal ordering or scales are broken.
  void validate() const;
};

struct WeatherSample {
  Tick tick;
  double ghi = 0.0;  // W/m2
  double ambient_temp_c = 0.0;
};

/// Noise-free diurnal shape. Used by forecasters for future exogenous inputs.
WeatherSample expected_weather(const WeatherParams& params, Tick tick);

/// Diurnal sinusoid plus Gaussian perturbation. Irradiance is exactly zero
/// outside the open daylight interval (sunrise, sunset).
WeatherSample sample_weather(const WeatherParams& params, Tick tick, Rng& rng);

// ---------------------------------------------------------------------------
// Photovoltaic array
// ---------------------------------------------------------------------------

struct PvParams {
  int panel_count = 200;
  double panel_area_m2 = 2.0;
  double eta_stc = 0.2;
  double gamma = -0.004;  // 1/K
  double t_noct_c = 45.0;
  double t_amb_noct_c = 20.0;
  double g_noct_wm2 = 800.0;
  static constexpr double kTStcC = 25.0;

  void validate() const;
  double area_m2() const { return panel_area_m2 * panel_count; }
};

/// Maps GHI to plane-of-array irradiance. Identity unless replaced.
using Transposition = std::function<double(const WeatherSample&)>;

/// NOCT cell temperature model.
double cell_temperature(double ambient_temp_c, double ghi, const PvParams& pv);

/// Temperature-derated conversion efficiency, clamped at zero.
double pv_efficiency(double cell_temp_c, const PvParams& pv);

/// Array output in kW.
double pv_power(const WeatherSample& sample, const PvParams& pv,
                const Transposition& transposition = {});

// ---------------------------------------------------------------------------
// Battery
// ---------------------------------------------------------------------------

struct BatteryParams {
  double capacity_kwh = 100.0;
  double eta_charge = 0.95;
  double eta_discharge = 0.95;
  double c_rate = 1.0;
  double self_discharge_per_tick = 1e-3;
  double soc_min_percent = 0.0;
  double soc_max_percent = 100.0;

  void validate() const;

  double max_power_kw() const { return c_rate * capacity_kwh; }
  double min_energy_kwh() const { return soc_min_percent / 100.0 * capacity_kwh; }
  double max_energy_kwh() const { return soc_max_percent / 100.0 * capacity_kwh; }
};

struct BatteryState {
  double stored_kwh = 0.0;

  double soc_percent(const BatteryParams& p) const { return 100.0 * stored_kwh / p.capacity_kwh; }
  static BatteryState from_soc(double soc_percent, const BatteryParams& p) {
    return BatteryState{soc_percent / 100.0 * p.capacity_kwh};
  }
};

struct BatteryStepResult {
  BatteryState state;
  double clamp_kwh = 0.0;  // signed correction applied to stay in the SoC band
};

// Absolute tolerance on band violations caused by an action.
inline constexpr double kEnergyToleranceKwh = 1e-6;

/// Discrete-time storage update:
///   E' = E + eta_c*P_ch*dt - P_dis*dt/eta_d - rate*E*dt
/// P_dis is power delivered to the bus. Self-discharge is proportional to the
/// energy held at the start of the tick.
BatteryStepResult step_battery(const BatteryState& state, double charge_kw, double discharge_kw,
                               double dt_hours, const BatteryParams& params);

/// Energy left after one idle tick (self-discharge only).
double idle_energy_kwh(const BatteryState& state, double dt_hours, const BatteryParams& params);

/// Largest charge power the battery can accept this tick without leaving the band.
double max_charge_kw(const BatteryState& state, double dt_hours, const BatteryParams& params);

/// Largest power the battery can deliver this tick without leaving the band.
double max_discharge_kw(const BatteryState& state, double dt_hours, const BatteryParams& params);

struct BatteryAction {
  double charge_kw = 0.0;
  double discharge_kw = 0.0;
};

/// Clamps a requested action to what the battery can physically do this tick.
BatteryAction feasible_battery_action(const BatteryState& state, BatteryAction requested,
                                      double dt_hours, const BatteryParams& params);

// ---------------------------------------------------------------------------
// Campus load
// ---------------------------------------------------------------------------

struct LoadProfile {
  double nominal_kw = 50.0;
  std::array<double, 24> schedule = campus_schedule();
  double noise_sigma_fraction = 0.05;

  void validate() const;

  /// 0.80 for hours 08-18, 0.50 for 06-08 and 18-20, 0.10 otherwise.
  static std::array<double, 24> campus_schedule();

  double expected_kw(Tick tick) const { return schedule[tick.hour_of_day()] * nominal_kw; }
};

double sample_load(const LoadProfile& profile, Tick tick, Rng& rng);

// ---------------------------------------------------------------------------
// External supply
// ---------------------------------------------------------------------------

struct ExternalSupplyParams {
  double capacity_kw = 100.0;
  double unit_cost = 0.20;  // currency per kWh

  void validate() const;
};

struct ExternalDraw {
  double delivered_kw = 0.0;
  double cost = 0.0;
};

ExternalDraw external_draw(double request_kw, const ExternalSupplyParams& params,
                           double dt_hours = kTickHours);

}  // namespace energytwin
