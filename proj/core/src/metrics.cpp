#include "energytwin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "energytwin/errors.hpp"

namespace energytwin {

RunLayout RunLayout::campus() { return {{"PVMain"}, {"CampusBuilding"}, {"MainBattery"}, {"ExternalGrid"}}; }

std::vector<StateUpdate> rounded(const std::vector<StateUpdate>& snapshot) {
  std::vector<StateUpdate> out = snapshot;
  for (auto& u : out) {
    u.generation_kw = round_fixed(u.generation_kw);
    u.consumption_kw = round_fixed(u.consumption_kw);
    u.stored_kwh = round_fixed(u.stored_kwh);
    u.soc_percent = round_fixed(u.soc_percent);
  }
  return out;
}

namespace {

bool has(const std::vector<std::string>& names, const std::string& n) {
  return std::find(names.begin(), names.end(), n) != names.end();
}

}  // namespace

std::vector<TickRecord> records_from_snapshots(const std::vector<std::vector<StateUpdate>>& snapshots,
                                               const RunLayout& layout, double dt) {
  std::vector<TickRecord> out;
  out.reserve(snapshots.size());
  for (const auto& snap : snapshots) {
    if (snap.empty()) continue;
    TickRecord r;
    r.tick = snap.front().tick;
    double pv = 0.0, load = 0.0, charge = 0.0, discharge = 0.0, imported = 0.0, soc_sum = 0.0;
    int storage = 0;
    for (const StateUpdate& u : snap) {
      const std::string& name = u.agent.str();
      if (has(layout.pv, name)) pv += u.generation_kw;
      if (has(layout.loads, name)) load += u.consumption_kw;
      if (has(layout.externals, name)) imported += u.generation_kw;
      if (has(layout.batteries, name)) {
        discharge += u.generation_kw;
        charge += u.consumption_kw;
        soc_sum += u.soc_percent;
        ++storage;
      }
    }
    const double residual = pv + discharge + imported - charge - load;
    const double surplus = std::max(0.0, residual);
    const double unmet = std::max(0.0, -residual);
    r.pv_kw = pv;
    r.load_kw = load;
    r.imported_kwh = imported * dt;
    r.exported_kwh = surplus * dt;
    r.unmet_kwh = unmet * dt;
    r.produced_kwh = std::max(0.0, pv - surplus) * dt + discharge * dt;
    r.consumed_kwh = std::max(0.0, load - unmet) * dt;
    r.soc_percent = storage > 0 ? soc_sum / storage : 0.0;
    out.push_back(r);
  }
  return out;
}

std::vector<std::vector<StateUpdate>> read_run_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("run log is empty");
  if (line != kRunLogHeader) throw ParseError("unexpected run log header: " + line);

  std::vector<std::vector<StateUpdate>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError("run log line " + std::to_string(line_no) + " has " +
                                            std::to_string(cells.size()) + " fields");
    auto number = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') throw ParseError("bad number '" + s + "' on line " + std::to_string(line_no));
      return v;
    };
    StateUpdate u;
    u.tick = Tick{static_cast<std::int64_t>(number(cells[0]))};
    u.agent = AgentId{cells[1]};
    u.generation_kw = number(cells[2]);
    u.consumption_kw = number(cells[3]);
    u.stored_kwh = number(cells[4]);
    u.soc_percent = number(cells[5]);
    if (out.empty() || out.back().front().tick != u.tick) {
      if (!out.empty() && u.tick <= out.back().front().tick) throw ParseError("ticks out of order on line " + std::to_string(line_no));
      out.emplace_back();
    }
    out.back().push_back(u);
  }
  return out;
}

// ---------------------------------------------------------------------------

double cebr(std::span<const TickRecord> records, Tick t) {
  double produced = 0.0, consumed = 0.0;
  for (const auto& r : records) {
    if (r.tick > t) break;
    produced += r.produced_kwh;
    consumed += r.consumed_kwh;
  }
  if (!(consumed > 0.0)) throw ZeroConsumption("no consumption up to tick " + std::to_string(t.index));
  return 100.0 * produced / consumed;
}

std::vector<std::pair<Tick, double>> cebr_series(std::span<const TickRecord> records) {
  std::vector<std::pair<Tick, double>> out;
  double produced = 0.0, consumed = 0.0;
  for (const auto& r : records) {
    produced += r.produced_kwh;
    consumed += r.consumed_kwh;
    if (consumed > 0.0) out.emplace_back(r.tick, 100.0 * produced / consumed);
  }
  return out;
}

IebrSeries iebr(std::span<const TickRecord> records, bool post_activation_only, std::int64_t activation_tick) {
  IebrSeries out;
  double sum = 0.0;
  for (const auto& r : records) {
    if (post_activation_only && r.tick.index <= activation_tick) continue;
    if (!(r.consumed_kwh > 0.0)) continue;
    const double v = 100.0 * r.produced_kwh / r.consumed_kwh;
    out.series.emplace_back(r.tick, v);
    sum += v;
  }
  if (out.series.empty()) throw EmptySeries("no tick with positive consumption");
  out.mean = sum / static_cast<double>(out.series.size());
  return out;
}

ReserveIndicators reserve_indicators(std::span<const TickRecord> records, std::int64_t activation_tick) {
  double soc_sum = 0.0;
  std::size_t n = 0, reserve = 0, scarce = 0;
  for (const auto& r : records) {
    if (r.tick.index <= activation_tick) continue;
    ++n;
    soc_sum += r.soc_percent;
    if (r.soc_percent >= 50.0) ++reserve;
    if (r.pv_kw < kZeroPvKw && r.soc_percent < 5.0) ++scarce;
  }
  if (n == 0) throw EmptySeries("no ticks after activation");
  const double dn = static_cast<double>(n);
  return {soc_sum / dn, 100.0 * static_cast<double>(reserve) / dn, 100.0 * static_cast<double>(scarce) / dn};
}

double equivalent_full_cycles(std::span<const double> soc) {
  double total = 0.0;
  for (std::size_t i = 1; i < soc.size(); ++i) total += std::abs(soc[i] - soc[i - 1]);
  return total / 200.0;
}

double forecast_mae(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw EmptySeries("no forecast pairs");
  double sum = 0.0;
  for (const auto& [predicted, realized] : pairs) sum += std::abs(predicted - realized);
  return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------

MetricsReport compute_metrics(std::span<const TickRecord> records, std::span<const ForecastPoint> forecasts,
                              std::int64_t activation_tick) {
  if (records.empty()) throw EmptySeries("no tick records");
  MetricsReport m;
  m.final_cebr_percent = cebr(records, records.back().tick);
  m.mean_iebr_post_activation_percent = iebr(records, true, activation_tick).mean;
  const auto reserve = reserve_indicators(records, activation_tick);
  m.avg_soc_post_activation_percent = reserve.avg_soc_percent;
  m.bri_at_least_50_percent = reserve.bri50_percent;
  m.scarcity_proxy_percent = reserve.scarcity_percent;

  std::vector<double> soc;
  soc.reserve(records.size());
  for (const auto& r : records) {
    soc.push_back(r.soc_percent);
    m.imported_kwh += r.imported_kwh;
    m.curtailed_kwh += r.exported_kwh;
    m.unmet_kwh += r.unmet_kwh;
  }
  m.equivalent_full_cycles = equivalent_full_cycles(soc);

  std::map<std::int64_t, const TickRecord*> by_tick;
  for (const auto& r : records) by_tick[r.tick.index] = &r;
  std::vector<std::pair<double, double>> load, pv, load_naive, pv_naive;
  for (const ForecastPoint& f : forecasts) {
    auto now = by_tick.find(f.tick.index);
    if (now == by_tick.end()) continue;
    load.emplace_back(f.load_q50, now->second->load_kw);
    pv.emplace_back(f.pv_q50, now->second->pv_kw);
    auto day_ago = by_tick.find(f.tick.index - 24);
    if (day_ago != by_tick.end()) {
      load_naive.emplace_back(day_ago->second->load_kw, now->second->load_kw);
      pv_naive.emplace_back(day_ago->second->pv_kw, now->second->pv_kw);
    }
  }
  if (!load.empty()) {
    m.load_mae_kw = forecast_mae(load);
    m.pv_mae_kw = forecast_mae(pv);
  }
  if (!load_naive.empty()) {
    m.load_persistence_mae_kw = forecast_mae(load_naive);
    m.pv_persistence_mae_kw = forecast_mae(pv_naive);
  }
  return m;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_fixed(*v) : std::string("NA"); }

}  // namespace

void write_metrics_text(std::ostream& out, const MetricsReport& m) {
  out << "final_cebr_percent=" << format_fixed(m.final_cebr_percent) << '\n'
      << "mean_iebr_post_activation_percent=" << format_fixed(m.mean_iebr_post_activation_percent) << '\n'
      << "avg_soc_post_activation_percent=" << format_fixed(m.avg_soc_post_activation_percent) << '\n'
      << "bri_at_least_50_percent=" << format_fixed(m.bri_at_least_50_percent) << '\n'
      << "scarcity_proxy_percent=" << format_fixed(m.scarcity_proxy_percent) << '\n'
      << "equivalent_full_cycles=" << format_fixed(m.equivalent_full_cycles) << '\n'
      << "load_mae_kw=" << opt(m.load_mae_kw) << '\n'
      << "pv_mae_kw=" << opt(m.pv_mae_kw) << '\n'
      << "load_persistence_mae_kw=" << opt(m.load_persistence_mae_kw) << '\n'
      << "pv_persistence_mae_kw=" << opt(m.pv_persistence_mae_kw) << '\n'
      << "imported_kwh=" << format_fixed(m.imported_kwh) << '\n'
      << "curtailed_kwh=" << format_fixed(m.curtailed_kwh) << '\n'
      << "unmet_kwh=" << format_fixed(m.unmet_kwh) << '\n';
}

void write_metrics_csv(std::ostream& out, const MetricsReport& m) {
  out << "metric,value\n"
      << "Final CEBR [%]," << format_fixed(m.final_cebr_percent) << '\n'
      << "Mean IEBR post-activation [%]," << format_fixed(m.mean_iebr_post_activation_percent) << '\n'
      << "Avg SoC post-activation [%]," << format_fixed(m.avg_soc_post_activation_percent) << '\n'
      << "BRI >= 50% post-activation [% of ticks]," << format_fixed(m.bri_at_least_50_percent) << '\n'
      << "ScarcityProxy post-activation [% of ticks]," << format_fixed(m.scarcity_proxy_percent) << '\n'
      << "Equivalent full cycles [-]," << format_fixed(m.equivalent_full_cycles) << '\n'
      << "Load forecast MAE [kW]," << opt(m.load_mae_kw) << '\n'
      << "PV forecast MAE [kW]," << opt(m.pv_mae_kw) << '\n';
}

void write_series(std::ostream& out, std::string_view value_name, const std::vector<std::pair<Tick, double>>& series) {
  out << "tick," << value_name << '\n';
  for (const auto& [t, v] : series) out << t.index << ',' << format_fixed(v) << '\n';
}

}  // namespace energytwin
