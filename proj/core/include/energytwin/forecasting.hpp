#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "energytwin/forest.hpp"
#include "energytwin/physics.hpp"
#include "energytwin/types.hpp"

namespace energytwin {

inline constexpr std::size_t kFeatureCount = 13;
inline constexpr std::int64_t kDeepestLag = 25;  // trend looks back to t-25

struct FeatureVector {
  std::array<double, 4> lags{};  // t-1, t-2, t-3, t-24
  double ma3 = 0.0;
  double ma24 = 0.0;
  double trend = 0.0;  // v[t-1] - v[t-25]
  double ghi = 0.0;
  double ambient_temp_c = 0.0;
  double sin_hour = 0.0;
  double cos_hour = 1.0;
  double sin_day_of_week = 0.0;
  double cos_day_of_week = 1.0;

  std::array<double, kFeatureCount> values() const;
};

/// Features for predicting series[t] from series[0..t) and the weather at t.
/// Only the first t entries of `series` are read. Throws InsufficientHistory.
FeatureVector series_features(std::span<const double> series, Tick t, const WeatherSample& weather);

/// Observed history, indexed by tick.
struct SeriesHistory {
  std::vector<double> load_kw;
  std::vector<double> pv_kw;
  std::vector<WeatherSample> weather;
};

struct FeaturePair {
  FeatureVector load;
  FeatureVector pv;
};

/// Needs load/PV observations before t and the weather sample at t.
FeaturePair build_features(const SeriesHistory& history, Tick t);

struct ForecastBundle {
  Tick origin;
  int horizon = 0;
  std::vector<double> load_q05, load_q50, load_q95;
  std::vector<double> pv_q05, pv_q50, pv_q95;

  /// q05 <= q50 <= q95 and everything non-negative.
  bool well_formed() const;
};

struct ForecastConfig {
  ForestConfig forest;
  int training_window = 168;
  std::int64_t warmup_ticks = 168;

  void validate() const;
};

/// Trains fresh load and PV forests on the trailing window each time it is
/// asked, then rolls forward recursively. Step 0 uses the weather observed at
/// t; later steps use the noise-free diurnal model.
class Forecaster {
 public:
  Forecaster(ForecastConfig config, WeatherParams weather, std::uint64_t seed);

  /// Throws InsufficientHistory before the warm-up threshold.
  ForecastBundle forecast(const SeriesHistory& history, Tick t, int horizon) const;

  const ForecastConfig& config() const { return config_; }

  /// Training set for one series at planning instant t.
  Dataset training_set(std::span<const double> series, const std::vector<WeatherSample>& weather,
                       Tick t) const;

 private:
  ForecastConfig config_;
  WeatherParams weather_;
  std::uint64_t seed_;
};

}  // namespace energytwin
