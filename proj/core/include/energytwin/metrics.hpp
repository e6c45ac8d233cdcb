#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "energytwin/kernel.hpp"
#include "energytwin/types.hpp"

namespace energytwin {

struct TickRecord {
  Tick tick;
  double produced_kwh = 0.0;  // PV used or stored plus battery discharge delivered
  double consumed_kwh = 0.0;  // load served
  double imported_kwh = 0.0;
  double exported_kwh = 0.0;  // surplus nobody absorbed
  double soc_percent = 0.0;
  double pv_kw = 0.0;
  double unmet_kwh = 0.0;
  double load_kw = 0.0;  // demand, served or not
};

/// Which run-log agents play which role.
struct RunLayout {
  std::vector<std::string> pv;
  std::vector<std::string> loads;
  std::vector<std::string> batteries;
  std::vector<std::string> externals;

  static RunLayout campus();
};

/// Rebuilds per-tick energy accounting from registry snapshots. Battery rows
/// carry discharge as generation and charge as consumption; external rows
/// carry import as generation. The bus residual
///   pv + discharge + import - charge - load
/// is surplus when positive and unmet demand when negative.
std::vector<TickRecord> records_from_snapshots(const std::vector<std::vector<StateUpdate>>& snapshots,
                                               const RunLayout& layout, double dt_hours = kTickHours);

/// Snapshot with every number passed through the log's fixed formatting.
std::vector<StateUpdate> rounded(const std::vector<StateUpdate>& snapshot);

/// Parses a run log. Throws ParseError.
std::vector<std::vector<StateUpdate>> read_run_log(std::istream& in);

// ---------------------------------------------------------------------------

/// Cumulative production over consumption up to and including tick t.
/// Throws ZeroConsumption.
double cebr(std::span<const TickRecord> records, Tick t);

struct IebrSeries {
  std::vector<std::pair<Tick, double>> series;
  double mean = 0.0;
};

/// Per-tick production over consumption, skipping ticks with no consumption.
/// With `post_activation_only`, only ticks after `activation_tick` count.
/// Throws EmptySeries.
IebrSeries iebr(std::span<const TickRecord> records, bool post_activation_only, std::int64_t activation_tick);

struct ReserveIndicators {
  double avg_soc_percent = 0.0;
  double bri50_percent = 0.0;
  double scarcity_percent = 0.0;
};

inline constexpr double kZeroPvKw = 1e-6;

/// Over ticks t > activation_tick. Throws EmptySeries if there are none.
ReserveIndicators reserve_indicators(std::span<const TickRecord> records, std::int64_t activation_tick);

/// Total SoC excursion over 200 percentage points.
double equivalent_full_cycles(std::span<const double> soc_percent);

/// Mean |predicted - realized|. Throws EmptySeries.
double forecast_mae(std::span<const std::pair<double, double>> pairs);

/// First-step median forecast made at a planning instant.
struct ForecastPoint {
  Tick tick;
  double load_q50 = 0.0;
  double pv_q50 = 0.0;
};

struct MetricsReport {
  double final_cebr_percent = 0.0;
  double mean_iebr_post_activation_percent = 0.0;
  double avg_soc_post_activation_percent = 0.0;
  double bri_at_least_50_percent = 0.0;
  double scarcity_proxy_percent = 0.0;
  double equivalent_full_cycles = 0.0;
  std::optional<double> load_mae_kw;
  std::optional<double> pv_mae_kw;
  std::optional<double> load_persistence_mae_kw;  // value 24 ticks earlier as the forecast
  std::optional<double> pv_persistence_mae_kw;
  double imported_kwh = 0.0;
  double curtailed_kwh = 0.0;
  double unmet_kwh = 0.0;
};

MetricsReport compute_metrics(std::span<const TickRecord> records, std::span<const ForecastPoint> forecasts,
                              std::int64_t activation_tick);

/// key=value lines.
void write_metrics_text(std::ostream& out, const MetricsReport& report);

/// metric,value rows with human-readable metric names.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);

/// Two-column plot data: tick,value.
void write_series(std::ostream& out, std::string_view value_name, const std::vector<std::pair<Tick, double>>& series);

/// CEBR after every tick (ticks before the first consumption are skipped).
std::vector<std::pair<Tick, double>> cebr_series(std::span<const TickRecord> records);

}  // namespace energytwin
