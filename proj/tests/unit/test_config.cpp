#include <gtest/gtest.h>

#include <string>

#include "energytwin/config.hpp"
#include "energytwin/errors.hpp"

using namespace energytwin;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST(Config, NominalFileMatchesTheCampus) {
  const auto cfg = load_config(std::string(ENERGYTWIN_CONFIG_DIR) + "/nominal.json");
  EXPECT_EQ(cfg.battery.capacity_kwh, 100.0);
  EXPECT_EQ(cfg.pv.panel_count, 200);
  EXPECT_EQ(cfg.battery.eta_charge, 0.95);
  EXPECT_EQ(cfg.battery.eta_discharge, 0.95);
  EXPECT_EQ(cfg.load.nominal_kw, 50.0);
  EXPECT_EQ(cfg.external.capacity_kw, 100.0);
  EXPECT_EQ(cfg.ticks, 336);
  EXPECT_EQ(cfg.weather.sunrise_tick, 6);
  EXPECT_EQ(cfg.weather.sunset_tick, 18);
  ASSERT_TRUE(cfg.planner.has_value());
  EXPECT_EQ(cfg.planner->activation_tick, 168);
  EXPECT_EQ(cfg.planner->horizon_ticks, 4);
  EXPECT_EQ(cfg.planner->replan_every_ticks, 2);
}

TEST(Config, EmptyObjectTakesDefaults) {
  const auto cfg = parse_config("{}");
  EXPECT_EQ(cfg.ticks, 336);
  EXPECT_EQ(cfg.mode, Mode::Baseline);
  EXPECT_EQ(cfg.initial_soc_percent, 50.0);
  EXPECT_FALSE(cfg.disturbance.has_value());
}

TEST(Config, SunriseAfterSunsetNamesSunrise) {
  EXPECT_EQ(field_of(R"({"weather": {"sunriseTick": 18, "sunsetTick": 6, "peakTick": 12}})"), "weather.sunriseTick");
}

TEST(Config, BaselineNeedsNoPlanner) {
  EXPECT_EQ(field_of(R"({"mode": "BASELINE"})"), "<accepted>");
  EXPECT_EQ(field_of(R"({"mode": "PREDICTIVE"})"), "planner");
  EXPECT_EQ(field_of(R"({"mode": "predictive", "planner": {}})"), "<accepted>");
}

TEST(Config, UnknownKeysRejectedWithPath) {
  EXPECT_EQ(field_of(R"({"battery": {"capacityKWh": 100}})"), "battery.capacityKWh");
  EXPECT_EQ(field_of(R"({"colour": "blue"})"), "colour");
}

TEST(Config, TypeErrors) {
  EXPECT_EQ(field_of(R"({"ticks": "many"})"), "ticks");
  EXPECT_EQ(field_of(R"({"pv": {"panelCount": 2.5}})"), "pv.panelCount");
  EXPECT_EQ(field_of(R"({"battery": 3})"), "battery");
}

TEST(Config, MalformedJsonIsAParseError) {
  EXPECT_THROW(parse_config("{ticks: 3"), ParseError);
  EXPECT_THROW(load_config("/definitely/not/here.json"), ParseError);
}

TEST(Config, ActivationMustFitTheRun) {
  EXPECT_EQ(field_of(R"({"ticks": 100})"), "planner.activationTick");
  EXPECT_EQ(field_of(R"({"ticks": 200, "planner": {"activationTick": 150}})"), "<accepted>");
}

TEST(Config, PlannerInvariants) {
  EXPECT_EQ(field_of(R"({"planner": {"horizonTicks": 1, "replanEveryTicks": 2}})"), "planner.horizonTicks");
  EXPECT_EQ(field_of(R"({"planner": {"importCostPerKwh": 0.1, "degradationCostPerKwh": 0.2}})"),
            "planner.degradationCostPerKwh");
}

TEST(Config, BatteryBand) {
  EXPECT_EQ(field_of(R"({"battery": {"initialSocPercent": 120}})"), "battery.initialSocPercent");
  EXPECT_EQ(field_of(R"({"battery": {"socMinPercent": 80, "socMaxPercent": 20}})"), "battery.socMinPercent");
}

TEST(Config, DisturbanceRules) {
  EXPECT_EQ(field_of(R"({"disturbance": {"kind": "PV_OUTAGE", "startTick": 100}})"), "disturbance.startTick");
  EXPECT_EQ(field_of(R"({"disturbance": {"kind": "LOAD_SPIKE", "startTick": 200, "endTick": 190}})"),
            "disturbance.endTick");
  EXPECT_EQ(field_of(R"({"disturbance": {"kind": "LOAD_SPIKE", "startTick": 200, "magnitude": 0.5}})"), "disturbance.magnitude");
  EXPECT_EQ(field_of(R"({"disturbance": {"kind": "PV_OUTAGE"}})"), "disturbance.startTick");
  const auto cfg = parse_config(R"({"disturbance": {"kind": "LOAD_SPIKE", "startTick": 210, "endTick": 220}})");
  ASSERT_TRUE(cfg.disturbance.has_value());
  EXPECT_EQ(cfg.disturbance->start_tick, 210);
  EXPECT_EQ(*cfg.disturbance->end_tick, 220);
}

TEST(Config, ResolvedEchoParsesBackToTheSameConfig) {
  const auto cfg = load_config(std::string(ENERGYTWIN_CONFIG_DIR) + "/nominal.json");
  const std::string echo = config_to_json(cfg);
  EXPECT_EQ(config_to_json(parse_config(echo)), echo);
  EXPECT_NE(echo.find("\"storageValuePerKwh\""), std::string::npos);
}

TEST(Config, ModeAndPresetNames) {
  EXPECT_EQ(parse_mode("baseline"), Mode::Baseline);
  EXPECT_EQ(parse_mode("PREDICTIVE"), Mode::Predictive);
  EXPECT_THROW(parse_mode("greedy"), ParseError);
  EXPECT_EQ(parse_preset("pv-outage"), ScenarioPreset::PvOutage);
  EXPECT_EQ(parse_preset("LOAD_SPIKE"), ScenarioPreset::LoadSpike);
  EXPECT_EQ(parse_preset("nominal"), ScenarioPreset::Nominal);
}

TEST(Disturbance, OutageZeroesPv) {
  const Disturbance d{DisturbanceKind::PvOutage, 200, std::nullopt, 1.0};
  EXPECT_EQ(apply_disturbance(d, Tick{250}, 73.6, 40.0), std::make_pair(0.0, 40.0));
}

TEST(Disturbance, SpikeMultipliesLoad) {
  const Disturbance d{DisturbanceKind::LoadSpike, 200, 260, 2.0};
  EXPECT_EQ(apply_disturbance(d, Tick{230}, 10.0, 40.0), std::make_pair(10.0, 80.0));
  EXPECT_EQ(apply_disturbance(d, Tick{260}, 10.0, 40.0).second, 80.0);
  EXPECT_EQ(apply_disturbance(d, Tick{261}, 10.0, 40.0).second, 40.0);
}

TEST(Disturbance, IdentityOutsideTheWindow) {
  const Disturbance d{DisturbanceKind::PvOutage, 200, std::nullopt, 1.0};
  EXPECT_EQ(apply_disturbance(d, Tick{199}, 73.6, 40.0), std::make_pair(73.6, 40.0));
  EXPECT_EQ(apply_disturbance(std::nullopt, Tick{250}, 73.6, 40.0), std::make_pair(73.6, 40.0));
}

TEST(Disturbance, Presets) {
  EXPECT_FALSE(preset_disturbance(ScenarioPreset::Nominal).has_value());
  const auto outage = *preset_disturbance(ScenarioPreset::PvOutage);
  EXPECT_EQ(outage.start_tick, 200);
  EXPECT_FALSE(outage.end_tick.has_value());
  const auto spike = *preset_disturbance(ScenarioPreset::LoadSpike);
  EXPECT_EQ(spike.start_tick, 200);
  EXPECT_EQ(*spike.end_tick, 260);
  EXPECT_EQ(spike.magnitude, 2.0);
}
