#include "energytwin/microgrid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "energytwin/errors.hpp"
#include "energytwin/random.hpp"

namespace energytwin {

std::string_view to_string(ControllerUsed c) {
  switch (c) {
    case ControllerUsed::Baseline: return "BASELINE";
    case ControllerUsed::Predictive: return "PREDICTIVE";
    case ControllerUsed::Fallback: return "FALLBACK";
  }
  return "BASELINE";
}

using namespace agent_names;

namespace {

const std::string kWeatherTopic = "weather";

struct ForecastRequest {
  Tick origin;
  int horizon = 0;
};

struct ForecastReply {
  std::optional<ForecastBundle> bundle;
  std::string error;
};

/// Exogenous state shared by the agents of one run.
struct World {
  explicit World(const ScenarioConfig& c) : cfg(c) {}
  const ScenarioConfig& cfg;
  SeriesHistory history;
  WeatherSample weather;
  double pv_kw = 0.0;
  double load_kw = 0.0;
  ExperimentLog log;
};

StateUpdate blank_update(const AgentId& id, Tick t) { return StateUpdate{id, t, 0.0, 0.0, 0.0, 0.0}; }

// ---------------------------------------------------------------------------

class WeatherAgent final : public Agent {
 public:
  explicit WeatherAgent(World& w) : Agent(AgentId{kWeather}), world_(w) {}

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase != Phase::Weather) return;
    Rng rng = make_stream(world_.cfg.seed, id(), ctx.tick);
    world_.weather = sample_weather(world_.cfg.weather, ctx.tick, rng);
    world_.history.weather.push_back(world_.weather);
    world_.log.weather.push_back(world_.weather);
    ctx.bus.broadcast_topic(kWeatherTopic, Envelope{id(), kWeatherTopic, Performative::Inform, {}, world_.weather},
                            ctx.bus.subscribers(kWeatherTopic));
  }

  StateUpdate state_update(Tick t) const override { return blank_update(id(), t); }

 private:
  World& world_;
};

class PvAgent final : public Agent {
 public:
  explicit PvAgent(World& w) : Agent(AgentId{kPvMain}), world_(w) {}

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase != Phase::Assets) return;
    const double raw = pv_power(world_.weather, world_.cfg.pv);
    output_kw_ = apply_disturbance(world_.cfg.disturbance, ctx.tick, raw, 0.0).first;
    world_.pv_kw = output_kw_;
    world_.history.pv_kw.push_back(output_kw_);
  }

  StateUpdate state_update(Tick t) const override {
    StateUpdate u = blank_update(id(), t);
    u.generation_kw = output_kw_;
    return u;
  }

 private:
  World& world_;
  double output_kw_ = 0.0;
};

class LoadAgent final : public Agent {
 public:
  explicit LoadAgent(World& w) : Agent(AgentId{kCampusBuilding}), world_(w) {}

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase != Phase::Assets) return;
    Rng rng = make_stream(world_.cfg.seed, id(), ctx.tick);
    const double raw = sample_load(world_.cfg.load, ctx.tick, rng);
    demand_kw_ = apply_disturbance(world_.cfg.disturbance, ctx.tick, 0.0, raw).second;
    world_.load_kw = demand_kw_;
    world_.history.load_kw.push_back(demand_kw_);
  }

  StateUpdate state_update(Tick t) const override {
    StateUpdate u = blank_update(id(), t);
    u.consumption_kw = demand_kw_;
    return u;
  }

 private:
  World& world_;
  double demand_kw_ = 0.0;
};

/// Contracts accepted this tick, executed in the actuation phase.
struct Contract {
  std::string conversation_id;
  Direction direction;
  double kw = 0.0;
};

class BatteryAgent final : public Agent, public CnpResponder {
 public:
  BatteryAgent(World& w, double unit_cost)
      : Agent(AgentId{kMainBattery}),
        params_(w.cfg.battery),
        state_(BatteryState::from_soc(w.cfg.initial_soc_percent, w.cfg.battery)),
        unit_cost_(unit_cost) {}

  const AgentId& responder_id() const override { return id(); }
  const BatteryState& state() const { return state_; }
  const BatteryParams& params() const { return params_; }

  Response on_cfp(const Cfp& cfp) override {
    // Already holding a charge contract: the cells cannot also discharge.
    for (const auto& c : contracts_)
      if (c.direction != cfp.direction) return Refusal{id(), cfp.conversation_id, "committed this tick"};
    return respond_battery(id(), state_, params_, unit_cost_, cfp);
  }

  void on_accept(const Cfp& cfp, double kw) override { contracts_.push_back({cfp.conversation_id, cfp.direction, kw}); }

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase == Phase::Weather) {
      contracts_.clear();
      charge_kw_ = discharge_kw_ = 0.0;
    }
    if (phase != Phase::Actuation) return;
    for (const auto& c : contracts_) (c.direction == Direction::AbsorbSurplus ? charge_kw_ : discharge_kw_) += c.kw;
    state_ = step_battery(state_, charge_kw_, discharge_kw_, kTickHours, params_).state;
    for (const auto& c : contracts_)
      ctx.bus.send(Envelope{id(), kAggregator, Performative::Inform, c.conversation_id, c.kw});
  }

  StateUpdate state_update(Tick t) const override {
    return StateUpdate{id(), t, discharge_kw_, charge_kw_, state_.stored_kwh, state_.soc_percent(params_)};
  }

 private:
  BatteryParams params_;
  BatteryState state_;
  double unit_cost_;
  std::vector<Contract> contracts_;
  double charge_kw_ = 0.0;
  double discharge_kw_ = 0.0;
};

class ExternalAgent final : public Agent, public CnpResponder {
 public:
  explicit ExternalAgent(World& w) : Agent(AgentId{kExternalGrid}), params_(w.cfg.external) {}

  const AgentId& responder_id() const override { return id(); }

  Response on_cfp(const Cfp& cfp) override { return respond_external(id(), params_, cfp); }
  void on_accept(const Cfp& cfp, double kw) override { contracts_.push_back({cfp.conversation_id, cfp.direction, kw}); }

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase == Phase::Weather) {
      contracts_.clear();
      delivered_kw_ = 0.0;
    }
    if (phase != Phase::Actuation) return;
    double requested = 0.0;
    for (const auto& c : contracts_) requested += c.kw;
    const ExternalDraw draw = external_draw(requested, params_);
    delivered_kw_ = draw.delivered_kw;
    cost_ += draw.cost;
    for (const auto& c : contracts_)
      ctx.bus.send(Envelope{id(), kAggregator, Performative::Inform, c.conversation_id, c.kw});
  }

  StateUpdate state_update(Tick t) const override {
    StateUpdate u = blank_update(id(), t);
    u.generation_kw = delivered_kw_;
    return u;
  }

 private:
  ExternalSupplyParams params_;
  std::vector<Contract> contracts_;
  double delivered_kw_ = 0.0;
  double cost_ = 0.0;
};

class ForecasterAgent final : public Agent {
 public:
  explicit ForecasterAgent(World& w) : Agent(AgentId{kForecaster}), world_(w), model_(make_model(w.cfg)) {}

  /// Answers every pending FORECAST_REQUEST.
  void serve(MessageBus& bus) {
    auto requests = bus.take_if(id(), [](const Envelope& e) { return e.performative == Performative::ForecastRequest; });
    for (const Envelope& e : requests) {
      const auto& req = std::any_cast<const ForecastRequest&>(e.payload);
      ForecastReply reply;
      try {
        reply.bundle = model_.forecast(world_.history, req.origin, req.horizon);
      } catch (const InsufficientHistory& ex) {
        reply.error = ex.what();
      }
      bus.send(Envelope{id(), e.from.str(), Performative::ForecastReply, e.conversation_id, std::move(reply)});
    }
  }

  StateUpdate state_update(Tick t) const override { return blank_update(id(), t); }

 private:
  static Forecaster make_model(const ScenarioConfig& cfg) {
    ForecastConfig fc = cfg.forecast;
    fc.warmup_ticks = cfg.effective_planner().activation_tick;
    if (cfg.mode == Mode::Baseline) fc.warmup_ticks = std::max<std::int64_t>(fc.warmup_ticks, kDeepestLag + 2 * fc.forest.min_leaf_size);
    return Forecaster(fc, cfg.weather, cfg.seed);
  }

  World& world_;
  Forecaster model_;
};

class AggregatorAgent final : public Agent {
 public:
  AggregatorAgent(World& w, MessageBus& bus, BatteryAgent& battery, ExternalAgent& external,
                  ForecasterAgent& forecaster)
      : Agent(AgentId{kAggregator}),
        world_(w),
        bus_(bus),
        battery_(battery),
        external_(external),
        forecaster_(forecaster),
        cnp_(id(), bus),
        planner_(w.cfg.effective_planner(), {w.cfg.battery}, w.cfg.external,
                 [this](Tick t, int h) { return request_forecast(t, h); }, w.cfg.ticks) {}

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase == Phase::Controller) control(ctx.tick);
  }

  void publish(TickContext& ctx) override {
    cnp_.collect_informs();
    Agent::publish(ctx);
  }

  StateUpdate state_update(Tick t) const override { return blank_update(id(), t); }

 private:
  ForecastBundle request_forecast(Tick t, int horizon) {
    const std::string conv = "forecast-" + std::to_string(t.index);
    bus_.send(Envelope{id(), kForecaster, Performative::ForecastRequest, conv, ForecastRequest{t, horizon}});
    bus_.deliver();
    forecaster_.serve(bus_);
    bus_.deliver();
    auto replies = bus_.take_if(id(), [&](const Envelope& e) {
      return e.performative == Performative::ForecastReply && e.conversation_id == conv;
    });
    if (replies.size() != 1) throw MissingResponse("forecaster did not answer " + conv);
    const auto& reply = std::any_cast<const ForecastReply&>(replies.front().payload);
    if (!reply.bundle) throw InsufficientHistory(reply.error);
    return *reply.bundle;
  }

  void control(Tick t) {
    const double load = world_.load_kw, pv = world_.pv_kw;
    const PlannerConfig& pc = planner_.config();

    ControlRecord rec;
    rec.tick = t;
    bool planned = world_.cfg.mode == Mode::Predictive && t.index >= pc.activation_tick;
    double plan_charge = 0.0, plan_discharge = 0.0;
    if (planned) {
      RollingDecision d = planner_.rolling_step(PlantView{t, load, pv, {battery_.state()}});
      rec.replanned = d.replanned;
      if (d.forecast) world_.log.forecasts.push_back(*d.forecast);
      if (d.replanned) {
        world_.log.plans.push_back(*planner_.cached_plan());
        world_.log.trees.push_back(*d.tree);
      }
      if (d.fallback) {
        planned = false;
        rec.controller = ControllerUsed::Fallback;
      } else {
        rec.controller = ControllerUsed::Predictive;
        plan_charge = d.action.total_charge();
        plan_discharge = d.action.total_discharge();
      }
    }
    rec.planned_charge_kw = plan_charge;
    rec.planned_discharge_kw = plan_discharge;

    std::vector<CnpResponder*> responders{&battery_, &external_};

    // Surplus first: the battery takes what it can, the grid never absorbs.
    const double absorb = planned ? plan_charge : std::max(0.0, pv - load);
    double charged = 0.0;
    if (absorb > kMinOfferKw) {
      const Cfp cfp{cnp_.next_conversation_id(t), Direction::AbsorbSurplus, absorb, t, 0};
      NegotiationRound round = cnp_.run(cfp, responders);
      charged = round.award.total_kw();
      world_.log.negotiations.push_back(std::move(round));
    }

    // Then whatever the bus is still short of. Under a plan the battery is
    // held to the planned discharge.
    const double deficit = load + charged - pv;
    double supplied = 0.0, discharged = 0.0;
    if (deficit > kMinOfferKw) {
      const Cfp cfp{cnp_.next_conversation_id(t), Direction::SupplyDeficit, deficit, t, 1};
      AwardCaps caps;
      if (planned) caps[battery_.id()] = charged > 0.0 ? 0.0 : plan_discharge;
      NegotiationRound round = cnp_.run(cfp, responders, caps);
      supplied = round.award.total_kw();
      discharged = round.award.awarded_to(battery_.id());
      world_.log.negotiations.push_back(std::move(round));
    }

    rec.charge_kw = charged;
    rec.discharge_kw = discharged;
    rec.import_kw = supplied - discharged;
    rec.curtailed_kw = std::max(0.0, pv - load - charged);
    rec.unmet_kw = std::max(0.0, deficit) - supplied;
    if (rec.unmet_kw < 1e-12) rec.unmet_kw = 0.0;
    world_.log.control.push_back(rec);
  }

  World& world_;
  MessageBus& bus_;
  BatteryAgent& battery_;
  ExternalAgent& external_;
  ForecasterAgent& forecaster_;
  ContractNet cnp_;
  RollingPlanner planner_;
};

}  // namespace

// ---------------------------------------------------------------------------

struct Microgrid::Impl {
  explicit Impl(ScenarioConfig c) : cfg(std::move(c)), world(cfg), orchestrator(cfg.ticks) {}

  ScenarioConfig cfg;
  World world;
  Orchestrator orchestrator;
  BatteryAgent* battery = nullptr;
};

Microgrid::Microgrid(ScenarioConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->cfg.validate();
  World& w = impl_->world;
  Orchestrator& o = impl_->orchestrator;
  o.bus().register_topic(kWeatherTopic);

  const PlannerConfig pc = impl_->cfg.effective_planner();
  auto& battery = o.emplace_agent<BatteryAgent>(w, pc.degradation_cost_per_kwh);
  auto& external = o.emplace_agent<ExternalAgent>(w);
  auto& forecaster = o.emplace_agent<ForecasterAgent>(w);
  o.emplace_agent<WeatherAgent>(w);
  auto& pv = o.emplace_agent<PvAgent>(w);
  o.emplace_agent<LoadAgent>(w);
  o.emplace_agent<AggregatorAgent>(w, o.bus(), battery, external, forecaster);
  o.bus().subscribe(kWeatherTopic, pv.id());
  o.bus().subscribe(kWeatherTopic, forecaster.id());
  impl_->battery = &battery;
}

Microgrid::~Microgrid() = default;

TickReport Microgrid::step() {
  TickReport r = impl_->orchestrator.advance_tick();
  impl_->world.log.reports.push_back(r);
  return r;
}

bool Microgrid::finished() const { return impl_->orchestrator.finished(); }
Orchestrator& Microgrid::orchestrator() { return impl_->orchestrator; }
const ScenarioConfig& Microgrid::config() const { return impl_->cfg; }
const ExperimentLog& Microgrid::log() const { return impl_->world.log; }
const BatteryState& Microgrid::battery_state() const { return impl_->battery->state(); }

ExperimentResult Microgrid::result() const {
  ExperimentResult out;
  out.config = impl_->cfg;
  out.log = impl_->world.log;

  std::vector<std::vector<StateUpdate>> snaps;
  snaps.reserve(out.log.reports.size());
  for (const auto& r : out.log.reports) snaps.push_back(rounded(r.snapshot));
  out.records = records_from_snapshots(snaps, RunLayout::campus());
  for (const auto& f : out.log.forecasts)
    out.forecast_points.push_back({f.origin, round_fixed(f.load_q50.front()), round_fixed(f.pv_q50.front())});
  out.metrics = compute_metrics(out.records, out.forecast_points, out.config.effective_planner().activation_tick);
  return out;
}

std::vector<std::string> check_run_invariants(const ExperimentResult& res) {
  std::vector<std::string> bad;
  const auto& reports = res.log.reports;
  if (static_cast<std::int64_t>(reports.size()) != res.config.ticks)
    bad.push_back("run has " + std::to_string(reports.size()) + " ticks, expected " + std::to_string(res.config.ticks));
  const BatteryParams& bp = res.config.battery;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string at = " at tick " + std::to_string(r.tick.index);
    if (r.tick.index != static_cast<std::int64_t>(i)) bad.push_back("tick sequence broken" + at);
    if (r.snapshot.size() != 7) bad.push_back("snapshot incomplete" + at);
    for (const auto& u : r.snapshot) {
      if (u.generation_kw < 0.0 || u.consumption_kw < 0.0 || u.stored_kwh < 0.0)
        bad.push_back("negative flow from " + u.agent.str() + at);
      if (u.agent.str() == kMainBattery) {
        if (u.soc_percent < bp.soc_min_percent - 1e-6 || u.soc_percent > bp.soc_max_percent + 1e-6)
          bad.push_back("SoC outside band" + at);
        if (u.generation_kw > 0.0 && u.consumption_kw > 0.0) bad.push_back("battery charged and discharged" + at);
      }
    }
  }
  for (const auto& f : res.log.forecasts)
    if (!f.well_formed()) bad.push_back("malformed forecast at tick " + std::to_string(f.origin.index));
  for (const auto& c : res.log.control)
    if (c.unmet_kw < 0.0 || c.curtailed_kw < 0.0) bad.push_back("negative settlement at tick " + std::to_string(c.tick.index));
  return bad;
}

ExperimentResult run_experiment(const ScenarioConfig& config) {
  Microgrid grid(config);
  while (!grid.finished()) grid.step();
  return grid.result();
}

// ---------------------------------------------------------------------------
// Output files

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ParseError("cannot write " + p.string());
  return out;
}

}  // namespace

void write_outputs(const ExperimentResult& res, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "plots");
  const ExperimentLog& log = res.log;

  {
    auto out = open_out(dir / "config.json");
    out << config_to_json(res.config);
  }
  {
    auto out = open_out(dir / "run.csv");
    write_run_log(out, log.reports);
  }
  {
    auto out = open_out(dir / "weather.csv");
    out << "tick,ghi_wm2,ambient_temp_c\n";
    for (const auto& w : log.weather)
      out << w.tick.index << ',' << format_fixed(w.ghi) << ',' << format_fixed(w.ambient_temp_c) << '\n';
  }
  {
    auto out = open_out(dir / "plan.csv");
    out << "tick,step,objective,charge_kw,discharge_kw,import_kw,export_kw,projected_soc_percent\n";
    for (const auto& p : log.plans) {
      for (std::size_t k = 0; k < p.steps.size(); ++k) {
        const auto& s = p.steps[k];
        const auto& soc = p.soc_trajectory_percent[k];
        out << p.origin.index << ',' << k << ',' << format_fixed(p.objective) << ',' << format_fixed(s.total_charge())
            << ',' << format_fixed(s.total_discharge()) << ',' << format_fixed(s.import_kw) << ','
            << format_fixed(s.export_kw) << ',' << format_fixed(soc.empty() ? 0.0 : soc.front()) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "scenarios.csv");
    out << "tick,branch,probability,step,load_kw,pv_kw\n";
    for (std::size_t i = 0; i < log.trees.size(); ++i) {
      for (const auto& b : log.trees[i].branches)
        for (std::size_t k = 0; k < b.load_kw.size(); ++k)
          out << log.plans[i].origin.index << ',' << to_string(b.label) << ',' << format_fixed(b.probability) << ','
              << k << ',' << format_fixed(b.load_kw[k]) << ',' << format_fixed(b.pv_kw[k]) << '\n';
    }
  }
  {
    auto out = open_out(dir / "negotiation.csv");
    out << kNegotiationLogHeader << '\n';
    for (const auto& r : log.negotiations) write_negotiation_rows(out, r);
  }
  {
    auto out = open_out(dir / "forecast.csv");
    out << kForecastLogHeader << '\n';
    for (const auto& f : log.forecasts)
      for (int k = 0; k < f.horizon; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out << f.origin.index << ',' << k << ',' << (f.origin + k).index << ',' << format_fixed(f.load_q05[i]) << ','
            << format_fixed(f.load_q50[i]) << ',' << format_fixed(f.load_q95[i]) << ',' << format_fixed(f.pv_q05[i])
            << ',' << format_fixed(f.pv_q50[i]) << ',' << format_fixed(f.pv_q95[i]) << '\n';
      }
  }
  {
    auto out = open_out(dir / "control.csv");
    out << "tick,controller,replanned,planned_charge_kw,planned_discharge_kw,charge_kw,discharge_kw,import_kw,"
           "curtailed_kw,unmet_kw\n";
    for (const auto& c : log.control)
      out << c.tick.index << ',' << to_string(c.controller) << ',' << (c.replanned ? 1 : 0) << ','
          << format_fixed(c.planned_charge_kw) << ',' << format_fixed(c.planned_discharge_kw) << ','
          << format_fixed(c.charge_kw) << ',' << format_fixed(c.discharge_kw) << ',' << format_fixed(c.import_kw)
          << ',' << format_fixed(c.curtailed_kw) << ',' << format_fixed(c.unmet_kw) << '\n';
  }
  {
    auto out = open_out(dir / "metrics.txt");
    write_metrics_text(out, res.metrics);
  }
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics_csv(out, res.metrics);
  }

  // Plot data.
  const std::int64_t activation = res.config.effective_planner().activation_tick;
  {
    auto out = open_out(dir / "plots" / "cebr.csv");
    write_series(out, "cebr_percent", cebr_series(res.records));
  }
  {
    auto out = open_out(dir / "plots" / "iebr.csv");
    write_series(out, "iebr_percent", iebr(res.records, false, activation).series);
  }
  {
    std::vector<std::pair<Tick, double>> soc;
    for (const auto& r : res.records) soc.emplace_back(r.tick, r.soc_percent);
    auto out = open_out(dir / "plots" / "soc.csv");
    write_series(out, "soc_percent", soc);
  }
  {
    auto out = open_out(dir / "plots" / "forecast_error.csv");
    out << "tick,load_error_kw,pv_error_kw\n";
    for (const auto& f : res.forecast_points) {
      auto it = std::find_if(res.records.begin(), res.records.end(), [&](const TickRecord& r) { return r.tick == f.tick; });
      if (it == res.records.end()) continue;
      out << f.tick.index << ',' << format_fixed(f.load_q50 - it->load_kw) << ',' << format_fixed(f.pv_q50 - it->pv_kw)
          << '\n';
    }
  }
}

std::vector<ForecastPoint> read_forecast_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kForecastLogHeader) throw ParseError("unexpected forecast log header");
  std::vector<ForecastPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw ParseError("forecast log row has " + std::to_string(cells.size()) + " fields");
    if (cells[1] != "0") continue;
    out.push_back({Tick{std::stoll(cells[0])}, std::strtod(cells[4].c_str(), nullptr),
                   std::strtod(cells[7].c_str(), nullptr)});
  }
  return out;
}

MetricsReport metrics_from_logs(const std::filesystem::path& dir) {
  const ScenarioConfig cfg = load_config(dir / "config.json");
  std::ifstream run(dir / "run.csv");
  if (!run) throw ParseError("missing run.csv in " + dir.string());
  const auto records = records_from_snapshots(read_run_log(run), RunLayout::campus());
  std::vector<ForecastPoint> points;
  if (std::ifstream fc(dir / "forecast.csv"); fc) points = read_forecast_points(fc);
  return compute_metrics(records, points, cfg.effective_planner().activation_tick);
}

}  // namespace energytwin
