#include "energytwin/forecasting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "energytwin/errors.hpp"
#include "energytwin/random.hpp"

namespace energytwin {

std::array<double, kFeatureCount> FeatureVector::values() const {
  return {lags[0], lags[1], lags[2], lags[3], ma3,     ma24,     trend,
          ghi,     ambient_temp_c, sin_hour, cos_hour, sin_day_of_week, cos_day_of_week};
}

FeatureVector series_features(std::span<const double> series, Tick t, const WeatherSample& weather) {
  const std::int64_t i = t.index;
  if (i < kDeepestLag)
    throw InsufficientHistory("features at tick " + std::to_string(i) + " need 25 ticks of history");
  if (static_cast<std::int64_t>(series.size()) < i)
    throw InsufficientHistory("series holds " + std::to_string(series.size()) + " values, tick " +
                              std::to_string(i) + " requested");
  auto at = [&](std::int64_t back) { return series[static_cast<std::size_t>(i - back)]; };

  FeatureVector f;
  f.lags = {at(1), at(2), at(3), at(24)};
  f.ma3 = (at(1) + at(2) + at(3)) / 3.0;
  double sum = 0.0;
  for (std::int64_t k = 1; k <= 24; ++k) sum += at(k);
  f.ma24 = sum / 24.0;
  f.trend = at(1) - at(25);
  f.ghi = weather.ghi;
  f.ambient_temp_c = weather.ambient_temp_c;
  const double hour_angle = 2.0 * std::numbers::pi * t.hour_of_day() / 24.0;
  const double day_angle = 2.0 * std::numbers::pi * t.day_of_week() / 7.0;
  f.sin_hour = std::sin(hour_angle);
  f.cos_hour = std::cos(hour_angle);
  f.sin_day_of_week = std::sin(day_angle);
  f.cos_day_of_week = std::cos(day_angle);
  return f;
}

FeaturePair build_features(const SeriesHistory& history, Tick t) {
  if (t.index < 0 || static_cast<std::int64_t>(history.weather.size()) <= t.index)
    throw InsufficientHistory("no weather sample for tick " + std::to_string(t.index));
  const WeatherSample& w = history.weather[static_cast<std::size_t>(t.index)];
  return {series_features(history.load_kw, t, w), series_features(history.pv_kw, t, w)};
}

bool ForecastBundle::well_formed() const {
  const auto h = static_cast<std::size_t>(horizon);
  for (const auto* v : {&load_q05, &load_q50, &load_q95, &pv_q05, &pv_q50, &pv_q95})
    if (v->size() != h) return false;
  for (std::size_t k = 0; k < h; ++k) {
    if (!(0.0 <= load_q05[k] && load_q05[k] <= load_q50[k] && load_q50[k] <= load_q95[k])) return false;
    if (!(0.0 <= pv_q05[k] && pv_q05[k] <= pv_q50[k] && pv_q50[k] <= pv_q95[k])) return false;
  }
  return true;
}

void ForecastConfig::validate() const {
  forest.validate();
  if (training_window < 2 * forest.min_leaf_size)
    throw InvalidParameter("forecast trainingWindow too short for minLeafSize");
  if (warmup_ticks < kDeepestLag + 2 * forest.min_leaf_size)
    throw InvalidParameter("forecast warm-up shorter than the feature history");
}

Forecaster::Forecaster(ForecastConfig config, WeatherParams weather, std::uint64_t seed)
    : config_(config), weather_(weather), seed_(seed) {
  config_.validate();
  weather_.validate();
}

Dataset Forecaster::training_set(std::span<const double> series, const std::vector<WeatherSample>& weather,
                                 Tick t) const {
  Dataset data(kFeatureCount);
  const std::int64_t first = std::max<std::int64_t>(kDeepestLag, t.index - config_.training_window);
  for (std::int64_t s = first; s < t.index; ++s) {
    const auto row = series_features(series, Tick{s}, weather[static_cast<std::size_t>(s)]).values();
    data.add(row, series[static_cast<std::size_t>(s)]);
  }
  return data;
}

namespace {

struct Rollout {
  std::vector<double> q05, q50, q95;
};

Rollout roll_forward(const RandomForest& forest, std::span<const double> observed, Tick t, int horizon,
                     const std::vector<WeatherSample>& exogenous, bool zero_at_night) {
  std::vector<double> series(observed.begin(), observed.begin() + t.index);
  Rollout out;
  for (int k = 0; k < horizon; ++k) {
    const Tick step = t + k;
    const WeatherSample& w = exogenous[static_cast<std::size_t>(k)];
    Quantiles q{};
    if (!(zero_at_night && w.ghi <= 0.0))
      q = forest.predict_quantiles(series_features(series, step, w).values());
    out.q05.push_back(q.q05);
    out.q50.push_back(q.q50);
    out.q95.push_back(q.q95);
    series.push_back(q.q50);
  }
  return out;
}

}  // namespace

ForecastBundle Forecaster::forecast(const SeriesHistory& history, Tick t, int horizon) const {
  if (horizon < 1) throw InvalidParameter("forecast horizon must be positive");
  if (t.index < config_.warmup_ticks)
    throw InsufficientHistory("forecasts start at tick " + std::to_string(config_.warmup_ticks) +
                              ", asked at " + std::to_string(t.index));
  const auto n = static_cast<std::size_t>(t.index);
  if (history.load_kw.size() < n || history.pv_kw.size() < n || history.weather.size() <= n)
    throw InsufficientHistory("history does not reach tick " + std::to_string(t.index));

  std::vector<WeatherSample> exogenous;
  exogenous.push_back(history.weather[n]);
  for (int k = 1; k < horizon; ++k) exogenous.push_back(expected_weather(weather_, t + k));

  const std::uint64_t base = stream_seed(seed_, AgentId{"Forecaster"}, t);
  const auto load_forest = RandomForest::train(training_set(history.load_kw, history.weather, t), config_.forest,
                                               splitmix64(base ^ stable_hash("load")));
  const auto pv_forest = RandomForest::train(training_set(history.pv_kw, history.weather, t), config_.forest,
                                             splitmix64(base ^ stable_hash("pv")));

  auto load = roll_forward(load_forest, history.load_kw, t, horizon, exogenous, false);
  auto pv = roll_forward(pv_forest, history.pv_kw, t, horizon, exogenous, true);

  ForecastBundle bundle;
  bundle.origin = t;
  bundle.horizon = horizon;
  bundle.load_q05 = std::move(load.q05);
  bundle.load_q50 = std::move(load.q50);
  bundle.load_q95 = std::move(load.q95);
  bundle.pv_q05 = std::move(pv.q05);
  bundle.pv_q50 = std::move(pv.q50);
  bundle.pv_q95 = std::move(pv.q95);
  return bundle;
}

}  // namespace energytwin
