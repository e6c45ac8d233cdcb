// energytwin: run microgrid scenarios and recompute their metrics.

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "energytwin/config.hpp"
#include "energytwin/errors.hpp"
#include "energytwin/microgrid.hpp"

namespace fs = std::filesystem;
using namespace energytwin;

namespace {

struct Overrides {
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> ticks;
  std::optional<std::string> scenario;
};

ScenarioConfig resolve(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = load_config(path);
  if (o.mode) cfg.mode = parse_mode(*o.mode);
  if (o.seed) cfg.seed = *o.seed;
  if (o.ticks) cfg.ticks = *o.ticks;
  if (o.scenario) cfg.disturbance = preset_disturbance(parse_preset(*o.scenario));
  // Predictive runs from a baseline-only file get the default planner.
  if (cfg.mode == Mode::Predictive && !cfg.planner) cfg.planner = cfg.effective_planner();
  cfg.validate();
  return cfg;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-9; }

bool same(const std::optional<double>& a, const std::optional<double>& b) {
  return a.has_value() == b.has_value() && (!a || same(*a, *b));
}

/// Offline recomputation must agree with what was computed during the run.
std::vector<std::string> check_metrics_roundtrip(const MetricsReport& online, const MetricsReport& offline) {
  std::vector<std::string> bad;
  auto cmp = [&](const char* name, bool ok) {
    if (!ok) bad.push_back(std::string("metric ") + name + " differs when recomputed from logs");
  };
  cmp("final_cebr_percent", same(online.final_cebr_percent, offline.final_cebr_percent));
  cmp("mean_iebr_post_activation_percent",
      same(online.mean_iebr_post_activation_percent, offline.mean_iebr_post_activation_percent));
  cmp("avg_soc_post_activation_percent",
      same(online.avg_soc_post_activation_percent, offline.avg_soc_post_activation_percent));
  cmp("bri_at_least_50_percent", same(online.bri_at_least_50_percent, offline.bri_at_least_50_percent));
  cmp("scarcity_proxy_percent", same(online.scarcity_proxy_percent, offline.scarcity_proxy_percent));
  cmp("equivalent_full_cycles", same(online.equivalent_full_cycles, offline.equivalent_full_cycles));
  cmp("load_mae_kw", same(online.load_mae_kw, offline.load_mae_kw));
  cmp("pv_mae_kw", same(online.pv_mae_kw, offline.pv_mae_kw));
  return bad;
}

int simulate(const std::string& config_path, const Overrides& o, const std::string& out_dir) {
  const ScenarioConfig cfg = resolve(config_path, o);
  const ExperimentResult res = run_experiment(cfg);
  write_outputs(res, out_dir);

  auto problems = check_run_invariants(res);
  for (auto& p : check_metrics_roundtrip(res.metrics, metrics_from_logs(out_dir))) problems.push_back(std::move(p));

  std::cout << "mode=" << to_string(cfg.mode) << " seed=" << cfg.seed << " ticks=" << cfg.ticks
            << " scenario=" << (cfg.disturbance ? to_string(cfg.disturbance->kind) : "NOMINAL") << '\n';
  write_metrics_text(std::cout, res.metrics);
  std::cout << "logs written to " << out_dir << '\n';
  for (const auto& p : problems) std::cerr << "invariant violated: " << p << '\n';
  return problems.empty() ? 0 : 3;
}

int metrics(const std::string& log_dir) {
  write_metrics_text(std::cout, metrics_from_logs(log_dir));
  return 0;
}

int compare(const std::string& config_path, const Overrides& o, const std::string& out_dir) {
  Overrides base = o, pred = o;
  base.mode = "baseline";
  pred.mode = "predictive";
  const ExperimentResult b = run_experiment(resolve(config_path, base));
  const ExperimentResult p = run_experiment(resolve(config_path, pred));

  std::vector<std::string> problems = check_run_invariants(b);
  for (auto& s : check_run_invariants(p)) problems.push_back(std::move(s));

  auto fmt = [](const std::optional<double>& v) { return v ? format_fixed(*v) : std::string("NA"); };
  std::ostringstream table;
  table << "metric,baseline,predictive\n"
        << "Final CEBR [%]," << format_fixed(b.metrics.final_cebr_percent) << ','
        << format_fixed(p.metrics.final_cebr_percent) << '\n'
        << "Mean IEBR post-activation [%]," << format_fixed(b.metrics.mean_iebr_post_activation_percent) << ','
        << format_fixed(p.metrics.mean_iebr_post_activation_percent) << '\n'
        << "Avg SoC post-activation [%]," << format_fixed(b.metrics.avg_soc_post_activation_percent) << ','
        << format_fixed(p.metrics.avg_soc_post_activation_percent) << '\n'
        << "BRI >= 50% post-activation [% of ticks]," << format_fixed(b.metrics.bri_at_least_50_percent) << ','
        << format_fixed(p.metrics.bri_at_least_50_percent) << '\n'
        << "ScarcityProxy post-activation [% of ticks]," << format_fixed(b.metrics.scarcity_proxy_percent) << ','
        << format_fixed(p.metrics.scarcity_proxy_percent) << '\n'
        << "Equivalent full cycles [-]," << format_fixed(b.metrics.equivalent_full_cycles) << ','
        << format_fixed(p.metrics.equivalent_full_cycles) << '\n'
        << "Load forecast MAE [kW],NA," << fmt(p.metrics.load_mae_kw) << '\n'
        << "PV forecast MAE [kW],NA," << fmt(p.metrics.pv_mae_kw) << '\n';

  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "compare.csv") << table.str();
  write_outputs(b, fs::path(out_dir) / "baseline");
  write_outputs(p, fs::path(out_dir) / "predictive");
  std::cout << table.str();
  for (const auto& s : problems) std::cerr << "invariant violated: " << s << '\n';
  return problems.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent microgrid simulator: rule-based vs rolling-horizon dispatch"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", log_dir;
  Overrides o;

  auto* sim = app.add_subcommand("simulate", "Run one scenario and write its logs");
  sim->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--mode", o.mode, "baseline | predictive");
  sim->add_option("--seed", o.seed, "Master seed");
  sim->add_option("--ticks", o.ticks, "Run length in ticks");
  sim->add_option("--scenario", o.scenario, "nominal | pv-outage | load-spike");
  sim->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* met = app.add_subcommand("metrics", "Recompute metrics from a log directory");
  met->add_option("--log", log_dir, "Directory written by simulate")->required()->check(CLI::ExistingDirectory);

  auto* cmp = app.add_subcommand("compare", "Run baseline and predictive on the same seed");
  cmp->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--seed", o.seed, "Master seed");
  cmp->add_option("--ticks", o.ticks, "Run length in ticks");
  cmp->add_option("--scenario", o.scenario, "nominal | pv-outage | load-spike");
  cmp->add_option("--out", out_dir, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return simulate(config_path, o, out_dir);
    if (met->parsed()) return metrics(log_dir);
    if (cmp->parsed()) return compare(config_path, o, out_dir);
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
