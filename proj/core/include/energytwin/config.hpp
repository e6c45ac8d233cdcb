#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "energytwin/forecasting.hpp"
#include "energytwin/physics.hpp"
#include "energytwin/planning.hpp"

namespace energytwin {

enum class Mode { Baseline, Predictive };
enum class DisturbanceKind { PvOutage, LoadSpike };
enum class ScenarioPreset { Nominal, PvOutage, LoadSpike };

std::string_view to_string(Mode m);
std::string_view to_string(DisturbanceKind k);
std::string_view to_string(ScenarioPreset p);

Mode parse_mode(std::string_view s);                // case-insensitive; throws ParseError
ScenarioPreset parse_preset(std::string_view s);    // nominal | pv-outage | load-spike

struct Disturbance {
  DisturbanceKind kind = DisturbanceKind::PvOutage;
  std::int64_t start_tick = 200;
  std::optional<std::int64_t> end_tick;  // inclusive; unset runs to the end
  double magnitude = 2.0;                // load multiplier, spikes only

  bool active(Tick t) const {
    return t.index >= start_tick && (!end_tick || t.index <= *end_tick);
  }
};

/// Outage zeroes PV and a spike multiplies load inside the window; identity
/// elsewhere. Returns (pv, load).
std::pair<double, double> apply_disturbance(const std::optional<Disturbance>& d, Tick t, double pv_kw,
                                            double load_kw);

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::int64_t ticks = 336;
  Mode mode = Mode::Baseline;
  WeatherParams weather;
  PvParams pv;
  BatteryParams battery;
  double initial_soc_percent = 50.0;
  LoadProfile load;
  ExternalSupplyParams external;
  std::optional<PlannerConfig> planner;  // required in predictive mode
  ForecastConfig forecast;
  std::optional<Disturbance> disturbance;

  /// Planner settings in effect; defaults when the block was omitted.
  PlannerConfig effective_planner() const;

  /// Throws ValidationError naming the offending key.
  void validate() const;
};

/// Parses and validates. Unknown keys are rejected. Throws ParseError or
/// ValidationError.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, defaults included, as pretty-printed JSON.
std::string config_to_json(const ScenarioConfig& config);

/// Stress presets: outage from tick 200 to the end; x2 load for ticks 200-260.
std::optional<Disturbance> preset_disturbance(ScenarioPreset preset);

}  // namespace energytwin
