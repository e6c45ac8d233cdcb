#include "energytwin/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "energytwin/errors.hpp"
#include "json.hpp"

namespace energytwin {

using nlohmann::json;

std::string_view to_string(Mode m) { return m == Mode::Baseline ? "BASELINE" : "PREDICTIVE"; }

std::string_view to_string(DisturbanceKind k) { return k == DisturbanceKind::PvOutage ? "PV_OUTAGE" : "LOAD_SPIKE"; }

std::string_view to_string(ScenarioPreset p) {
  switch (p) {
    case ScenarioPreset::Nominal: return "nominal";
    case ScenarioPreset::PvOutage: return "pv-outage";
    case ScenarioPreset::LoadSpike: return "load-spike";
  }
  return "nominal";
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

}  // namespace

Mode parse_mode(std::string_view s) {
  const std::string u = upper(s);
  if (u == "BASELINE") return Mode::Baseline;
  if (u == "PREDICTIVE") return Mode::Predictive;
  throw ParseError("unknown mode '" + std::string(s) + "'");
}

ScenarioPreset parse_preset(std::string_view s) {
  const std::string u = upper(s);
  if (u == "NOMINAL") return ScenarioPreset::Nominal;
  if (u == "PV_OUTAGE") return ScenarioPreset::PvOutage;
  if (u == "LOAD_SPIKE") return ScenarioPreset::LoadSpike;
  throw ParseError("unknown scenario '" + std::string(s) + "'");
}

std::pair<double, double> apply_disturbance(const std::optional<Disturbance>& d, Tick t, double pv_kw,
                                            double load_kw) {
  if (!d || !d->active(t)) return {pv_kw, load_kw};
  if (d->kind == DisturbanceKind::PvOutage) return {0.0, load_kw};
  return {pv_kw, d->magnitude * load_kw};
}

std::optional<Disturbance> preset_disturbance(ScenarioPreset preset) {
  switch (preset) {
    case ScenarioPreset::Nominal: return std::nullopt;
    case ScenarioPreset::PvOutage: return Disturbance{DisturbanceKind::PvOutage, 200, std::nullopt, 1.0};
    case ScenarioPreset::LoadSpike: return Disturbance{DisturbanceKind::LoadSpike, 200, 260, 2.0};
  }
  return std::nullopt;
}

PlannerConfig ScenarioConfig::effective_planner() const {
  if (planner) return *planner;
  PlannerConfig p;
  p.import_cost_per_kwh = external.unit_cost;
  p.degradation_cost_per_kwh = 0.01 * external.unit_cost;
  return p;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

}  // namespace

void ScenarioConfig::validate() const {
  check(ticks > 0, "ticks", "must be positive");

  const auto& w = weather;
  check(w.sunrise_tick >= 0 && w.sunrise_tick <= 23, "weather.sunriseTick", "must be an hour of day");
  check(w.sunset_tick >= 1 && w.sunset_tick <= 24, "weather.sunsetTick", "must be an hour of day");
  check(w.sunrise_tick < w.sunset_tick, "weather.sunriseTick", "must be before sunsetTick");
  check(w.sunrise_tick < w.peak_tick, "weather.peakTick", "must be after sunriseTick");
  check(w.peak_tick < w.sunset_tick, "weather.peakTick", "must be before sunsetTick");
  check(w.g_peak > 0.0, "weather.gPeak", "must be positive");
  check(w.sigma_g >= 0.0, "weather.sigmaG", "must be non-negative");
  check(w.sigma_t >= 0.0, "weather.sigmaT", "must be non-negative");

  check(pv.panel_count > 0, "pv.panelCount", "must be positive");
  check(pv.panel_area_m2 > 0.0, "pv.panelAreaM2", "must be positive");
  check(pv.eta_stc > 0.0 && pv.eta_stc < 1.0, "pv.etaStc", "must be in (0,1)");
  check(pv.gamma < 0.0, "pv.gamma", "must be negative");
  check(pv.g_noct_wm2 > 0.0, "pv.gNoctWm2", "must be positive");

  const auto& b = battery;
  check(b.capacity_kwh > 0.0, "battery.capacityKwh", "must be positive");
  check(b.eta_charge > 0.0 && b.eta_charge <= 1.0, "battery.etaCharge", "must be in (0,1]");
  check(b.eta_discharge > 0.0 && b.eta_discharge <= 1.0, "battery.etaDischarge", "must be in (0,1]");
  check(b.c_rate > 0.0, "battery.cRate", "must be positive");
  check(b.self_discharge_per_tick >= 0.0 && b.self_discharge_per_tick < 1.0, "battery.selfDischargePerTick",
        "must be in [0,1)");
  check(b.soc_min_percent >= 0.0 && b.soc_min_percent <= 100.0, "battery.socMinPercent", "must be in [0,100]");
  check(b.soc_max_percent >= 0.0 && b.soc_max_percent <= 100.0, "battery.socMaxPercent", "must be in [0,100]");
  check(b.soc_min_percent < b.soc_max_percent, "battery.socMinPercent", "must be below socMaxPercent");
  check(initial_soc_percent >= b.soc_min_percent && initial_soc_percent <= b.soc_max_percent,
        "battery.initialSocPercent", "must lie inside the SoC band");

  check(load.nominal_kw >= 0.0, "load.nominalKw", "must be non-negative");
  check(load.noise_sigma_fraction >= 0.0, "load.noiseSigmaFraction", "must be non-negative");
  for (std::size_t h = 0; h < load.schedule.size(); ++h)
    check(load.schedule[h] >= 0.0 && load.schedule[h] <= 1.0, "load.schedule[" + std::to_string(h) + "]",
          "must be in [0,1]");

  check(external.capacity_kw > 0.0, "external.capacityKw", "must be positive");
  check(external.unit_cost > 0.0, "external.unitCost", "must be positive");

  check(!(mode == Mode::Predictive && !planner), "planner", "required in PREDICTIVE mode");
  const PlannerConfig p = effective_planner();
  p.validate();
  check(p.activation_tick < ticks, "planner.activationTick", "must be below ticks");

  const auto& f = forecast;
  check(f.forest.tree_count >= 2, "forecast.treeCount", "must be at least 2");
  check(f.forest.max_depth >= 1, "forecast.maxDepth", "must be at least 1");
  check(f.forest.min_leaf_size >= 1, "forecast.minLeafSize", "must be at least 1");
  check(f.forest.feature_subsample_fraction > 0.0 && f.forest.feature_subsample_fraction <= 1.0,
        "forecast.featureSubsampleFraction", "must be in (0,1]");
  check(f.training_window >= 2 * f.forest.min_leaf_size, "forecast.trainingWindowTicks",
        "must hold at least 2*minLeafSize samples");
  if (mode == Mode::Predictive)
    check(p.activation_tick >= kDeepestLag + 2 * f.forest.min_leaf_size, "planner.activationTick",
          "leaves too little history for forecasting");

  if (disturbance) {
    const auto& d = *disturbance;
    check(d.start_tick > p.activation_tick, "disturbance.startTick", "must be after planner.activationTick");
    check(!d.end_tick || d.start_tick <= *d.end_tick, "disturbance.endTick", "must not precede startTick");
    check(d.kind != DisturbanceKind::LoadSpike || d.magnitude > 1.0, "disturbance.magnitude",
          "must exceed 1 for LOAD_SPIKE");
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

/// Reads members of one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }

  void mark(const std::string& key) { seen_.insert(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = node_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ValidationError(field(key), "must be a number");
        target = v.get<double>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ValidationError(field(key), "must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0)
            target = v.get<T>();
          else
            throw ValidationError(field(key), "must be non-negative");
        } else {
          target = v.get<T>();
        }
      } else {
        if (!v.is_string()) throw ValidationError(field(key), "must be a string");
        target = v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ValidationError(field(key), e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) throw ValidationError(field(key), "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_weather(Section s, WeatherParams& w) {
  s.read("sunriseTick", w.sunrise_tick);
  s.read("sunsetTick", w.sunset_tick);
  s.read("peakTick", w.peak_tick);
  s.read("gPeak", w.g_peak);
  s.read("tempMeanDay", w.temp_mean_day);
  s.read("tempMeanNight", w.temp_mean_night);
  s.read("sigmaG", w.sigma_g);
  s.read("sigmaT", w.sigma_t);
  s.finish();
}

void read_pv(Section s, PvParams& p) {
  s.read("panelCount", p.panel_count);
  s.read("panelAreaM2", p.panel_area_m2);
  s.read("etaStc", p.eta_stc);
  s.read("gamma", p.gamma);
  s.read("tNoctC", p.t_noct_c);
  s.read("tAmbNoctC", p.t_amb_noct_c);
  s.read("gNoctWm2", p.g_noct_wm2);
  if (s.has("tStcC")) {
    double t = PvParams::kTStcC;
    s.read("tStcC", t);
    if (t != PvParams::kTStcC) throw ValidationError(s.field("tStcC"), "is fixed at 25");
  }
  s.finish();
}

void read_battery(Section s, BatteryParams& b, double& initial_soc) {
  s.read("capacityKwh", b.capacity_kwh);
  s.read("etaCharge", b.eta_charge);
  s.read("etaDischarge", b.eta_discharge);
  s.read("cRate", b.c_rate);
  s.read("selfDischargePerTick", b.self_discharge_per_tick);
  s.read("socMinPercent", b.soc_min_percent);
  s.read("socMaxPercent", b.soc_max_percent);
  s.read("initialSocPercent", initial_soc);
  s.finish();
}

void read_load(Section s, LoadProfile& l) {
  s.read("nominalKw", l.nominal_kw);
  s.read("noiseSigmaFraction", l.noise_sigma_fraction);
  if (s.has("schedule")) {
    const json& v = s.raw("schedule");
    if (!v.is_array() || v.size() != 24) throw ValidationError(s.field("schedule"), "must be 24 numbers");
    for (std::size_t h = 0; h < 24; ++h) {
      if (!v[h].is_number()) throw ValidationError(s.field("schedule") + "[" + std::to_string(h) + "]", "must be a number");
      l.schedule[h] = v[h].get<double>();
    }
  } else {
    s.mark("schedule");
  }
  s.finish();
}

void read_external(Section s, ExternalSupplyParams& e) {
  s.read("capacityKw", e.capacity_kw);
  s.read("unitCost", e.unit_cost);
  s.finish();
}

void read_planner(Section s, PlannerConfig& p) {
  s.read("horizonTicks", p.horizon_ticks);
  s.read("replanEveryTicks", p.replan_every_ticks);
  s.read("activationTick", p.activation_tick);
  s.read("importCostPerKwh", p.import_cost_per_kwh);
  s.read("degradationCostPerKwh", p.degradation_cost_per_kwh);
  s.read("exportValuePerKwh", p.export_value_per_kwh);
  if (s.has("storageValuePerKwh")) {
    double v = 0.0;
    s.read("storageValuePerKwh", v);
    p.storage_value_per_kwh = v;
  } else {
    s.mark("storageValuePerKwh");
  }
  s.finish();
}

void read_forecast(Section s, ForecastConfig& f) {
  s.read("treeCount", f.forest.tree_count);
  s.read("maxDepth", f.forest.max_depth);
  s.read("minLeafSize", f.forest.min_leaf_size);
  s.read("featureSubsampleFraction", f.forest.feature_subsample_fraction);
  s.read("trainingWindowTicks", f.training_window);
  s.finish();
}

Disturbance read_disturbance(Section s) {
  Disturbance d;
  std::string kind;
  if (!s.has("kind")) throw ValidationError(s.field("kind"), "is required");
  s.read("kind", kind);
  const std::string k = upper(kind);
  if (k == "PV_OUTAGE")
    d.kind = DisturbanceKind::PvOutage;
  else if (k == "LOAD_SPIKE")
    d.kind = DisturbanceKind::LoadSpike;
  else
    throw ValidationError(s.field("kind"), "must be PV_OUTAGE or LOAD_SPIKE");
  if (!s.has("startTick")) throw ValidationError(s.field("startTick"), "is required");
  s.read("startTick", d.start_tick);
  if (s.has("endTick")) {
    std::int64_t end = 0;
    s.read("endTick", end);
    d.end_tick = end;
  } else {
    s.mark("endTick");  // null or absent: run to the end
  }
  d.magnitude = d.kind == DisturbanceKind::LoadSpike ? 2.0 : 1.0;
  s.read("magnitude", d.magnitude);
  s.finish();
  return d;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }

  ScenarioConfig c;
  Section top(root, "");
  top.read("seed", c.seed);
  top.read("ticks", c.ticks);
  if (top.has("mode")) {
    std::string mode;
    top.read("mode", mode);
    try {
      c.mode = parse_mode(mode);
    } catch (const ParseError&) {
      throw ValidationError("mode", "must be BASELINE or PREDICTIVE");
    }
  } else {
    top.mark("mode");
  }

  auto section = [&](const char* key, auto&& fn) {
    if (top.has(key)) fn(Section(top.raw(key), key));
    else top.mark(key);
  };
  section("weather", [&](Section s) { read_weather(std::move(s), c.weather); });
  section("pv", [&](Section s) { read_pv(std::move(s), c.pv); });
  section("battery", [&](Section s) { read_battery(std::move(s), c.battery, c.initial_soc_percent); });
  section("load", [&](Section s) { read_load(std::move(s), c.load); });
  section("external", [&](Section s) { read_external(std::move(s), c.external); });
  section("planner", [&](Section s) {
    PlannerConfig p;
    p.import_cost_per_kwh = c.external.unit_cost;
    p.degradation_cost_per_kwh = 0.01 * c.external.unit_cost;
    read_planner(std::move(s), p);
    c.planner = p;
  });
  section("forecast", [&](Section s) { read_forecast(std::move(s), c.forecast); });
  section("disturbance", [&](Section s) { c.disturbance = read_disturbance(std::move(s)); });
  top.finish();

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  const PlannerConfig p = c.effective_planner();
  json j;
  j["seed"] = c.seed;
  j["ticks"] = c.ticks;
  j["mode"] = std::string(to_string(c.mode));
  j["weather"] = {{"sunriseTick", c.weather.sunrise_tick}, {"sunsetTick", c.weather.sunset_tick},
                  {"peakTick", c.weather.peak_tick},       {"gPeak", c.weather.g_peak},
                  {"tempMeanDay", c.weather.temp_mean_day}, {"tempMeanNight", c.weather.temp_mean_night},
                  {"sigmaG", c.weather.sigma_g},           {"sigmaT", c.weather.sigma_t}};
  j["pv"] = {{"panelCount", c.pv.panel_count}, {"panelAreaM2", c.pv.panel_area_m2}, {"etaStc", c.pv.eta_stc},
             {"gamma", c.pv.gamma},            {"tNoctC", c.pv.t_noct_c},             {"tAmbNoctC", c.pv.t_amb_noct_c},
             {"gNoctWm2", c.pv.g_noct_wm2},    {"tStcC", PvParams::kTStcC}};
  j["battery"] = {{"capacityKwh", c.battery.capacity_kwh},
                  {"etaCharge", c.battery.eta_charge},
                  {"etaDischarge", c.battery.eta_discharge},
                  {"cRate", c.battery.c_rate},
                  {"selfDischargePerTick", c.battery.self_discharge_per_tick},
                  {"socMinPercent", c.battery.soc_min_percent},
                  {"socMaxPercent", c.battery.soc_max_percent},
                  {"initialSocPercent", c.initial_soc_percent}};
  j["load"] = {{"nominalKw", c.load.nominal_kw},
               {"schedule", c.load.schedule},
               {"noiseSigmaFraction", c.load.noise_sigma_fraction}};
  j["external"] = {{"capacityKw", c.external.capacity_kw}, {"unitCost", c.external.unit_cost}};
  j["planner"] = {{"horizonTicks", p.horizon_ticks},
                  {"replanEveryTicks", p.replan_every_ticks},
                  {"activationTick", p.activation_tick},
                  {"importCostPerKwh", p.import_cost_per_kwh},
                  {"degradationCostPerKwh", p.degradation_cost_per_kwh},
                  {"exportValuePerKwh", p.export_value_per_kwh},
                  {"storageValuePerKwh", p.terminal_value()}};
  j["forecast"] = {{"treeCount", c.forecast.forest.tree_count},
                   {"maxDepth", c.forecast.forest.max_depth},
                   {"minLeafSize", c.forecast.forest.min_leaf_size},
                   {"featureSubsampleFraction", c.forecast.forest.feature_subsample_fraction},
                   {"trainingWindowTicks", c.forecast.training_window}};
  if (c.disturbance) {
    const auto& d = *c.disturbance;
    j["disturbance"] = {{"kind", std::string(to_string(d.kind))},
                        {"startTick", d.start_tick},
                        {"endTick", d.end_tick ? json(*d.end_tick) : json(nullptr)},
                        {"magnitude", d.magnitude}};
  } else {
    j["disturbance"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace energytwin
