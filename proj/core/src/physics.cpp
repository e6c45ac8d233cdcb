#include "energytwin/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "energytwin/errors.hpp"

namespace energytwin {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

double band_violation(double e, double lo, double hi) {
  if (e < lo) return lo - e;
  if (e > hi) return e - hi;
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Weather

void WeatherParams::validate() const {
  require(sunrise_tick >= 0 && sunset_tick <= 24, "weather ticks must be hours of day");
  require(sunrise_tick < peak_tick && peak_tick < sunset_tick,
          "weather requires sunriseTick < peakTick < sunsetTick");
  require(g_peak > 0.0, "weather gPeak must be positive");
  require(sigma_g >= 0.0 && sigma_t >= 0.0, "weather noise scales must be non-negative");
}

WeatherSample expected_weather(const WeatherParams& p, Tick tick) {
  const int h = tick.hour_of_day();
  WeatherSample s{tick, 0.0, 0.0};
  if (h > p.sunrise_tick && h < p.sunset_tick) {
    const double phase = std::numbers::pi * (h - p.sunrise_tick) / (p.sunset_tick - p.sunrise_tick);
    s.ghi = std::max(0.0, p.g_peak * std::sin(phase));
  }
  const double mid = 0.5 * (p.temp_mean_day + p.temp_mean_night);
  const double half = 0.5 * (p.temp_mean_day - p.temp_mean_night);
  s.ambient_temp_c = mid + half * std::cos(2.0 * std::numbers::pi * (h - p.peak_tick) / 24.0);
  return s;
}

WeatherSample sample_weather(const WeatherParams& p, Tick tick, Rng& rng) {
  WeatherSample s = expected_weather(p, tick);
  // Both draws are always taken so the stream layout does not depend on the hour.
  const double g_noise = p.sigma_g * standard_normal(rng);
  const double t_noise = p.sigma_t * standard_normal(rng);
  const int h = tick.hour_of_day();
  if (h > p.sunrise_tick && h < p.sunset_tick) s.ghi = std::max(0.0, s.ghi + g_noise);
  s.ambient_temp_c += t_noise;
  return s;
}

// ---------------------------------------------------------------------------
// PV

void PvParams::validate() const {
  require(panel_count > 0, "pv panelCount must be positive");
  require(panel_area_m2 > 0.0, "pv panelAreaM2 must be positive");
  require(eta_stc > 0.0 && eta_stc < 1.0, "pv etaStc must be in (0,1)");
  require(gamma < 0.0, "pv gamma must be negative");
  require(g_noct_wm2 > 0.0, "pv gNoctWm2 must be positive");
}

double cell_temperature(double ambient_temp_c, double ghi, const PvParams& pv) {
  return ambient_temp_c + (ghi / pv.g_noct_wm2) * (pv.t_noct_c - pv.t_amb_noct_c);
}

double pv_efficiency(double cell_temp_c, const PvParams& pv) {
  return std::max(0.0, pv.eta_stc * (1.0 + pv.gamma * (cell_temp_c - PvParams::kTStcC)));
}

double pv_power(const WeatherSample& sample, const PvParams& pv, const Transposition& transposition) {
  const double poa = transposition ? transposition(sample) : sample.ghi;
  if (poa <= 0.0) return 0.0;
  const double eta = pv_efficiency(cell_temperature(sample.ambient_temp_c, poa, pv), pv);
  return eta * poa * pv.area_m2() / 1000.0;
}

// ---------------------------------------------------------------------------
// Battery

void BatteryParams::validate() const {
  require(capacity_kwh > 0.0, "battery capacityKwh must be positive");
  require(eta_charge > 0.0 && eta_charge <= 1.0, "battery etaCharge must be in (0,1]");
  require(eta_discharge > 0.0 && eta_discharge <= 1.0, "battery etaDischarge must be in (0,1]");
  require(c_rate > 0.0, "battery cRate must be positive");
  require(self_discharge_per_tick >= 0.0 && self_discharge_per_tick < 1.0,
          "battery selfDischargePerTick must be in [0,1)");
  require(soc_min_percent >= 0.0 && soc_max_percent <= 100.0 && soc_min_percent < soc_max_percent,
          "battery requires 0 <= socMinPercent < socMaxPercent <= 100");
}

double idle_energy_kwh(const BatteryState& s, double dt, const BatteryParams& p) {
  return s.stored_kwh - p.self_discharge_per_tick * s.stored_kwh * dt;
}

double max_charge_kw(const BatteryState& s, double dt, const BatteryParams& p) {
  const double room = p.max_energy_kwh() - idle_energy_kwh(s, dt, p);
  return std::clamp(room / (p.eta_charge * dt), 0.0, p.max_power_kw());
}

double max_discharge_kw(const BatteryState& s, double dt, const BatteryParams& p) {
  const double usable = idle_energy_kwh(s, dt, p) - p.min_energy_kwh();
  return std::clamp(usable * p.eta_discharge / dt, 0.0, p.max_power_kw());
}

BatteryAction feasible_battery_action(const BatteryState& s, BatteryAction req, double dt,
                                      const BatteryParams& p) {
  BatteryAction out;
  out.charge_kw = std::clamp(req.charge_kw, 0.0, max_charge_kw(s, dt, p));
  out.discharge_kw = std::clamp(req.discharge_kw, 0.0, max_discharge_kw(s, dt, p));
  return out;
}

BatteryStepResult step_battery(const BatteryState& s, double charge_kw, double discharge_kw,
                               double dt, const BatteryParams& p) {
  if (charge_kw < 0.0 || discharge_kw < 0.0)
    throw InvalidParameter("battery powers must be non-negative");
  if (charge_kw > 0.0 && discharge_kw > 0.0)
    throw SimultaneousChargeDischarge("battery cannot charge and discharge in the same tick");
  const double pmax = p.max_power_kw();
  if (charge_kw > pmax + kEnergyToleranceKwh || discharge_kw > pmax + kEnergyToleranceKwh)
    throw InfeasibleAction("battery power exceeds C-rate limit");

  const double idle = idle_energy_kwh(s, dt, p);
  const double raw = idle + p.eta_charge * charge_kw * dt - discharge_kw * dt / p.eta_discharge;

  const double lo = p.min_energy_kwh();
  const double hi = p.max_energy_kwh();
  // Drift caused by self-discharge alone is clamped silently; anything the
  // action adds on top of it must be within tolerance.
  const double excess = band_violation(raw, lo, hi) - band_violation(idle, lo, hi);
  if (excess > kEnergyToleranceKwh) {
    std::ostringstream msg;
    msg << "battery action leaves SoC band by " << excess << " kWh";
    throw InfeasibleAction(msg.str());
  }
  const double settled = std::clamp(raw, lo, hi);
  return BatteryStepResult{BatteryState{settled}, settled - raw};
}

// ---------------------------------------------------------------------------
// Load

std::array<double, 24> LoadProfile::campus_schedule() {
  std::array<double, 24> s{};
  for (int h = 0; h < 24; ++h) {
    if (h >= 8 && h < 18)
      s[h] = 0.80;
    else if ((h >= 6 && h < 8) || (h >= 18 && h < 20))
      s[h] = 0.50;
    else
      s[h] = 0.10;
  }
  return s;
}

void LoadProfile::validate() const {
  require(nominal_kw >= 0.0, "load nominalKw must be non-negative");
  require(noise_sigma_fraction >= 0.0, "load noiseSigmaFraction must be non-negative");
  for (double f : schedule) require(f >= 0.0 && f <= 1.0, "load schedule fractions must be in [0,1]");
}

double sample_load(const LoadProfile& profile, Tick tick, Rng& rng) {
  const double noise = profile.noise_sigma_fraction * standard_normal(rng);
  return std::max(0.0, profile.expected_kw(tick) * (1.0 + noise));
}

// ---------------------------------------------------------------------------
// External supply

void ExternalSupplyParams::validate() const {
  require(capacity_kw > 0.0, "external capacityKw must be positive");
  require(unit_cost > 0.0, "external unitCost must be positive");
}

ExternalDraw external_draw(double request_kw, const ExternalSupplyParams& params, double dt) {
  if (request_kw < 0.0) throw InvalidParameter("external request must be non-negative");
  const double delivered = std::min(request_kw, params.capacity_kw);
  return ExternalDraw{delivered, delivered * dt * params.unit_cost};
}

}  // namespace energytwin
