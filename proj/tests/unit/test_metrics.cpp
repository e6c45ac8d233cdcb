#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "energytwin/errors.hpp"
#include "energytwin/metrics.hpp"

using namespace energytwin;

namespace {

TickRecord rec(std::int64_t t, double produced, double consumed, double soc = 50.0, double pv = 10.0) {
  TickRecord r;
  r.tick = Tick{t};
  r.produced_kwh = produced;
  r.consumed_kwh = consumed;
  r.soc_percent = soc;
  r.pv_kw = pv;
  r.load_kw = consumed;
  return r;
}

StateUpdate su(const char* agent, std::int64_t t, double gen, double cons, double soc = 0.0) {
  StateUpdate u;
  u.agent = AgentId{agent};
  u.tick = Tick{t};
  u.generation_kw = gen;
  u.consumption_kw = cons;
  u.soc_percent = soc;
  u.stored_kwh = soc;
  return u;
}

}  // namespace

TEST(Cebr, DoubleProductionIsTwoHundredPercent) {
  std::vector<TickRecord> rs;
  for (int t = 0; t < 10; ++t) rs.push_back(rec(t, 2.0 * (t + 1), t + 1.0));
  EXPECT_DOUBLE_EQ(cebr(rs, Tick{9}), 200.0);
  EXPECT_DOUBLE_EQ(cebr(rs, Tick{0}), 200.0);
}

TEST(Cebr, CumulativeNotAveraged) {
  const std::vector<TickRecord> rs = {rec(0, 10, 5), rec(1, 0, 15)};
  EXPECT_DOUBLE_EQ(cebr(rs, Tick{1}), 50.0);
  const auto series = cebr_series(rs);
  ASSERT_EQ(series.size(), 2u);
  EXPECT_DOUBLE_EQ(series[0].second, 200.0);
  EXPECT_DOUBLE_EQ(series[1].second, 50.0);
}

TEST(Cebr, NothingConsumedThrows) {
  const std::vector<TickRecord> rs = {rec(0, 5, 0)};
  EXPECT_THROW(cebr(rs, Tick{0}), ZeroConsumption);
}

TEST(Iebr, BalancedTicksAverageToHundred) {
  std::vector<TickRecord> rs;
  for (int t = 0; t < 24; ++t) rs.push_back(rec(t, 3.0 + t, 3.0 + t));
  EXPECT_DOUBLE_EQ(iebr(rs, false, 0).mean, 100.0);
}

TEST(Iebr, TwoTickHandExample) {
  const std::vector<TickRecord> rs = {rec(0, 10, 5), rec(1, 0, 5)};
  const auto s = iebr(rs, false, 0);
  ASSERT_EQ(s.series.size(), 2u);
  EXPECT_DOUBLE_EQ(s.series[0].second, 200.0);
  EXPECT_DOUBLE_EQ(s.series[1].second, 0.0);
  EXPECT_DOUBLE_EQ(s.mean, 100.0);
}

TEST(Iebr, ZeroConsumptionTicksAreSkipped) {
  const std::vector<TickRecord> rs = {rec(0, 10, 5), rec(1, 4, 0), rec(2, 5, 5)};
  const auto s = iebr(rs, false, 0);
  EXPECT_EQ(s.series.size(), 2u);
  EXPECT_DOUBLE_EQ(s.mean, 150.0);
}

TEST(Iebr, PostActivationOnly) {
  const std::vector<TickRecord> rs = {rec(0, 10, 5), rec(1, 5, 5), rec(2, 0, 5)};
  const auto s = iebr(rs, true, 0);
  EXPECT_EQ(s.series.size(), 2u);
  EXPECT_DOUBLE_EQ(s.mean, 50.0);
  EXPECT_THROW(iebr(rs, true, 2), EmptySeries);
}

TEST(Reserve, ConstantSixtyWithSun) {
  std::vector<TickRecord> rs;
  for (int t = 0; t < 20; ++t) rs.push_back(rec(t, 1, 1, t <= 5 ? 0.0 : 60.0, 5.0));
  const auto r = reserve_indicators(rs, 5);
  EXPECT_DOUBLE_EQ(r.avg_soc_percent, 60.0);
  EXPECT_DOUBLE_EQ(r.bri50_percent, 100.0);
  EXPECT_DOUBLE_EQ(r.scarcity_percent, 0.0);
}

TEST(Reserve, ScarcityCountingOracle) {
  // 40 post-activation ticks: 20 dark, and half of those at SoC 4%.
  std::vector<TickRecord> rs;
  rs.push_back(rec(0, 1, 1, 0.0, 0.0));
  int expected_scarce = 0;
  for (int t = 1; t <= 40; ++t) {
    const bool dark = t % 2 == 0;
    const bool low = dark && (t % 4 == 0);
    expected_scarce += low ? 1 : 0;
    rs.push_back(rec(t, 1, 1, low ? 4.0 : 30.0, dark ? 0.0 : 12.0));
  }
  ASSERT_EQ(expected_scarce, 10);
  EXPECT_DOUBLE_EQ(reserve_indicators(rs, 0).scarcity_percent, 25.0);
}

TEST(Reserve, BriCountsTicksAtOrAboveFifty) {
  std::vector<TickRecord> rs;
  for (int t = 0; t < 5; ++t) rs.push_back(rec(t, 1, 1, t < 2 ? 50.0 : 49.999));
  EXPECT_DOUBLE_EQ(reserve_indicators(rs, -1).bri50_percent, 40.0);
  EXPECT_THROW(reserve_indicators(rs, 4), EmptySeries);
}

TEST(Efc, HandExamples) {
  const std::vector<double> full = {0, 100, 0};
  EXPECT_DOUBLE_EQ(equivalent_full_cycles(full), 1.0);
  const std::vector<double> flat(30, 42.0);
  EXPECT_EQ(equivalent_full_cycles(flat), 0.0);
  const std::vector<double> mixed = {50, 60, 40, 40};
  EXPECT_DOUBLE_EQ(equivalent_full_cycles(mixed), 0.15);
}

TEST(Mae, HandExamples) {
  const std::vector<std::pair<double, double>> perfect = {{1, 1}, {5, 5}};
  EXPECT_EQ(forecast_mae(perfect), 0.0);
  const std::vector<std::pair<double, double>> errs = {{11, 10}, {0, 3}};
  EXPECT_DOUBLE_EQ(forecast_mae(errs), 2.0);
  EXPECT_THROW(forecast_mae({}), EmptySeries);
}

TEST(Records, SurplusAndDischargeAccounting) {
  // pv 60, load 20, battery charges 30: 10 kW surplus curtailed.
  const std::vector<std::vector<StateUpdate>> snaps = {
      {su("CampusBuilding", 0, 0, 20), su("ExternalGrid", 0, 0, 0), su("MainBattery", 0, 0, 30, 40),
       su("PVMain", 0, 60, 0)},
      // dark, load 40: 9.5 from the battery, 30.5 imported.
      {su("CampusBuilding", 1, 0, 40), su("ExternalGrid", 1, 30.5, 0), su("MainBattery", 1, 9.5, 0, 30),
       su("PVMain", 1, 0, 0)},
      // dark, load 40, only 25 imported: 15 unmet.
      {su("CampusBuilding", 2, 0, 40), su("ExternalGrid", 2, 25, 0), su("MainBattery", 2, 0, 0, 30),
       su("PVMain", 2, 0, 0)}};
  const auto rs = records_from_snapshots(snaps, RunLayout::campus());
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_DOUBLE_EQ(rs[0].produced_kwh, 50.0);
  EXPECT_DOUBLE_EQ(rs[0].consumed_kwh, 20.0);
  EXPECT_DOUBLE_EQ(rs[0].exported_kwh, 10.0);
  EXPECT_DOUBLE_EQ(rs[0].soc_percent, 40.0);
  EXPECT_DOUBLE_EQ(rs[1].produced_kwh, 9.5);
  EXPECT_DOUBLE_EQ(rs[1].imported_kwh, 30.5);
  EXPECT_DOUBLE_EQ(rs[1].consumed_kwh, 40.0);
  EXPECT_DOUBLE_EQ(rs[2].unmet_kwh, 15.0);
  EXPECT_DOUBLE_EQ(rs[2].consumed_kwh, 25.0);
}

TEST(Records, DischargeLiftsCebrAboveHundred) {
  // Sunny tick charges, dark tick discharges; both count as local production.
  const std::vector<std::vector<StateUpdate>> snaps = {
      {su("CampusBuilding", 0, 0, 10), su("MainBattery", 0, 0, 40, 60), su("PVMain", 0, 50, 0)},
      {su("CampusBuilding", 1, 0, 10), su("MainBattery", 1, 10, 0, 49), su("PVMain", 1, 0, 0)}};
  const auto rs = records_from_snapshots(snaps, RunLayout::campus());
  EXPECT_DOUBLE_EQ(cebr(rs, Tick{1}), 100.0 * (50.0 + 10.0) / 20.0);
}

TEST(RunLogParse, RoundTrip) {
  const std::string text =
      "tick,agent,generation_kw,consumption_kw,stored_kwh,soc_percent\n"
      "0,A,1.500000,0.000000,0.000000,0.000000\n"
      "0,B,0.000000,2.250000,10.000000,10.000000\n"
      "1,A,3.000000,0.000000,0.000000,0.000000\n";
  std::istringstream in(text);
  const auto snaps = read_run_log(in);
  ASSERT_EQ(snaps.size(), 2u);
  EXPECT_EQ(snaps[0].size(), 2u);
  EXPECT_EQ(snaps[0][1].consumption_kw, 2.25);
  EXPECT_EQ(snaps[1][0].generation_kw, 3.0);
}

TEST(RunLogParse, Errors) {
  std::istringstream bad_header("tick,agent\n");
  EXPECT_THROW(read_run_log(bad_header), ParseError);
  std::istringstream short_row("tick,agent,generation_kw,consumption_kw,stored_kwh,soc_percent\n0,A,1\n");
  EXPECT_THROW(read_run_log(short_row), ParseError);
  std::istringstream bad_number(
      "tick,agent,generation_kw,consumption_kw,stored_kwh,soc_percent\n0,A,x,0,0,0\n");
  EXPECT_THROW(read_run_log(bad_number), ParseError);
  std::istringstream backwards(
      "tick,agent,generation_kw,consumption_kw,stored_kwh,soc_percent\n1,A,0,0,0,0\n0,A,0,0,0,0\n");
  EXPECT_THROW(read_run_log(backwards), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(read_run_log(empty), ParseError);
}

TEST(Report, ForecastMaeAgainstPersistence) {
  std::vector<TickRecord> rs;
  for (int t = 0; t < 30; ++t) {
    TickRecord r = rec(t, 1, 1);
    r.load_kw = t % 24 == 5 ? 10.0 : 4.0;
    r.pv_kw = 0.0;
    rs.push_back(r);
  }
  const std::vector<ForecastPoint> fc = {{Tick{28}, 5.0, 0.0}, {Tick{29}, 4.0, 1.0}};
  const auto m = compute_metrics(rs, fc, 25);
  EXPECT_DOUBLE_EQ(*m.load_mae_kw, (1.0 + 6.0) / 2.0);
  EXPECT_DOUBLE_EQ(*m.pv_mae_kw, 0.5);
  EXPECT_DOUBLE_EQ(*m.load_persistence_mae_kw, 0.0);
}

TEST(Report, CsvRowNames) {
  MetricsReport m;
  std::ostringstream out;
  write_metrics_csv(out, m);
  const std::string s = out.str();
  for (const char* row : {"Final CEBR [%]", "Mean IEBR post-activation [%]", "Avg SoC post-activation [%]",
                          "BRI >= 50% post-activation [% of ticks]", "ScarcityProxy post-activation [% of ticks]",
                          "Equivalent full cycles [-]", "Load forecast MAE [kW],NA", "PV forecast MAE [kW],NA"})
    EXPECT_NE(s.find(row), std::string::npos) << row;
}
