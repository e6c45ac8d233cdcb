#include "energytwin/kernel.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <ostream>

#include "energytwin/errors.hpp"

namespace energytwin {

std::string_view to_string(Performative p) {
  switch (p) {
    case Performative::Tick: return "TICK";
    case Performative::StateUpdate: return "STATE_UPDATE";
    case Performative::Cfp: return "CFP";
    case Performative::Propose: return "PROPOSE";
    case Performative::Refuse: return "REFUSE";
    case Performative::AcceptProposal: return "ACCEPT_PROPOSAL";
    case Performative::RejectProposal: return "REJECT_PROPOSAL";
    case Performative::Inform: return "INFORM";
    case Performative::ForecastRequest: return "FORECAST_REQUEST";
    case Performative::ForecastReply: return "FORECAST_REPLY";
  }
  return "UNKNOWN";
}

int delivery_rank(Performative p) {
  // Protocol order: announcements, requests, bids, decisions, reports.
  switch (p) {
    case Performative::Tick: return 0;
    case Performative::ForecastRequest: return 1;
    case Performative::ForecastReply: return 2;
    case Performative::Cfp: return 3;
    case Performative::Propose: return 4;
    case Performative::Refuse: return 4;
    case Performative::AcceptProposal: return 5;
    case Performative::RejectProposal: return 5;
    case Performative::Inform: return 6;
    case Performative::StateUpdate: return 7;
  }
  return 8;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Weather: return "weather";
    case Phase::Assets: return "assets";
    case Phase::Controller: return "controller";
    case Phase::Actuation: return "actuation";
    case Phase::Publish: return "publish";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// AgentStateRegistry

void AgentStateRegistry::register_agent(const AgentId& id) {
  auto it = std::lower_bound(agents_.begin(), agents_.end(), id);
  if (it != agents_.end() && *it == id) throw DuplicateUpdate("agent registered twice: " + id.str());
  agents_.insert(it, id);
}

void AgentStateRegistry::begin_tick(Tick tick) {
  if (open_) throw UnsettledTick("tick " + std::to_string(current_.index) + " was never settled");
  if (!history_.empty() && tick <= current_)
    throw StaleUpdate("ticks must increase strictly");
  current_ = tick;
  open_ = true;
  pending_.clear();
}

void AgentStateRegistry::publish(const StateUpdate& update) {
  if (!std::binary_search(agents_.begin(), agents_.end(), update.agent))
    throw UnknownAgent("unregistered agent " + update.agent.str());
  if (!open_ || update.tick != current_)
    throw StaleUpdate("update from " + update.agent.str() + " for tick " +
                      std::to_string(update.tick.index) + " while tick " +
                      std::to_string(current_.index) + " is current");
  if (pending_.count(update.agent) != 0)
    throw DuplicateUpdate("second update from " + update.agent.str() + " in tick " +
                          std::to_string(current_.index));
  pending_.emplace(update.agent, update);
  latest_.insert_or_assign(update.agent, update);
}

const StateUpdate& AgentStateRegistry::query(const AgentId& agent) const {
  auto it = latest_.find(agent);
  if (it == latest_.end()) throw UnknownAgent("no state for " + agent.str());
  return it->second;
}

bool AgentStateRegistry::published_this_tick(const AgentId& agent) const {
  return open_ && pending_.count(agent) != 0;
}

std::vector<StateUpdate> AgentStateRegistry::settle() {
  std::vector<StateUpdate> snapshot;
  snapshot.reserve(agents_.size());
  for (const AgentId& id : agents_) {
    auto it = pending_.find(id);
    if (it == pending_.end())
      throw UnsettledTick(id.str() + " did not publish in tick " + std::to_string(current_.index));
    snapshot.push_back(it->second);
  }
  open_ = false;
  history_.push_back(snapshot);
  return snapshot;
}

// ---------------------------------------------------------------------------
// MessageBus

void MessageBus::register_topic(const std::string& topic) { topics_.insert(topic); }

void MessageBus::subscribe(const std::string& topic, const AgentId& agent) {
  if (!has_topic(topic)) throw UnknownTopic(topic);
  subscriptions_[topic].insert(agent);
}

std::vector<AgentId> MessageBus::subscribers(const std::string& topic) const {
  if (!has_topic(topic)) throw UnknownTopic(topic);
  auto it = subscriptions_.find(topic);
  if (it == subscriptions_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t MessageBus::broadcast_topic(const std::string& topic, const Envelope& envelope,
                                        std::vector<AgentId> subscribers) {
  if (!has_topic(topic)) throw UnknownTopic(topic);
  std::sort(subscribers.begin(), subscribers.end());
  subscribers.erase(std::unique(subscribers.begin(), subscribers.end()), subscribers.end());
  for (const AgentId& sub : subscribers) {
    Envelope copy = envelope;
    copy.to = sub.str();
    mailboxes_[sub].push_back(copy);
    trace_.push_back(std::move(copy));
  }
  return subscribers.size();
}

void MessageBus::send(Envelope envelope) { pending_.push_back(std::move(envelope)); }

void MessageBus::deliver() {
  std::stable_sort(pending_.begin(), pending_.end(), [](const Envelope& a, const Envelope& b) {
    const int ra = delivery_rank(a.performative), rb = delivery_rank(b.performative);
    if (ra != rb) return ra < rb;
    return a.from < b.from;
  });
  for (Envelope& e : pending_) {
    trace_.push_back(e);
    mailboxes_[AgentId{e.to}].push_back(std::move(e));
  }
  pending_.clear();
}

std::vector<Envelope> MessageBus::take(const AgentId& agent) {
  auto it = mailboxes_.find(agent);
  if (it == mailboxes_.end()) return {};
  std::vector<Envelope> out = std::move(it->second);
  mailboxes_.erase(it);
  return out;
}

std::vector<Envelope> MessageBus::take_if(const AgentId& agent,
                                         const std::function<bool(const Envelope&)>& keep) {
  std::vector<Envelope> out;
  auto it = mailboxes_.find(agent);
  if (it == mailboxes_.end()) return out;
  auto& box = it->second;
  auto split = std::stable_partition(box.begin(), box.end(), [&](const Envelope& e) { return !keep(e); });
  std::move(split, box.end(), std::back_inserter(out));
  box.erase(split, box.end());
  return out;
}

// ---------------------------------------------------------------------------
// Agent / Orchestrator

void Agent::on_phase(Phase, TickContext&) {}

void Agent::publish(TickContext& ctx) {
  StateUpdate update = state_update(ctx.tick);
  ctx.registry.publish(update);
  ctx.bus.send(Envelope{id(), std::string(Orchestrator::kRegistryId), Performative::StateUpdate, {},
                        std::move(update)});
}

Orchestrator::Orchestrator(std::int64_t run_length) : run_length_(run_length) {
  bus_.register_topic(std::string(kTickTopic));
}

Agent& Orchestrator::add_agent(std::unique_ptr<Agent> agent) {
  registry_.register_agent(agent->id());
  bus_.subscribe(std::string(kTickTopic), agent->id());
  auto it = std::lower_bound(agents_.begin(), agents_.end(), agent,
                             [](const auto& a, const auto& b) { return a->id() < b->id(); });
  return **agents_.insert(it, std::move(agent));
}

TickReport Orchestrator::advance_tick() {
  if (finished()) throw UnsettledTick("run already finished");
  registry_.begin_tick(current_);
  bus_.clear_trace();  // trace() covers the most recent tick only
  bus_.clear_mailboxes();
  TickContext ctx{current_, bus_, registry_};

  bus_.broadcast_topic(std::string(kTickTopic),
                       Envelope{AgentId{"Orchestrator"}, {}, Performative::Tick, {}, current_},
                       bus_.subscribers(std::string(kTickTopic)));

  for (Phase phase : {Phase::Weather, Phase::Assets, Phase::Controller, Phase::Actuation}) {
    for (auto& agent : agents_) agent->on_phase(phase, ctx);
    bus_.deliver();
  }
  for (auto& agent : agents_) agent->publish(ctx);
  bus_.deliver();

  TickReport report{current_, registry_.settle()};
  reports_.push_back(report);
  current_ = current_.next();
  return report;
}

// ---------------------------------------------------------------------------
// Run log

std::string format_fixed(double value) {
  char buf[64];
  if (value == 0.0) value = 0.0;  // fold -0
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

double round_fixed(double value) { return std::strtod(format_fixed(value).c_str(), nullptr); }

std::string format_run_row(const StateUpdate& u) {
  std::string row = std::to_string(u.tick.index);
  row += ',';
  row += u.agent.str();
  for (double v : {u.generation_kw, u.consumption_kw, u.stored_kwh, u.soc_percent}) {
    row += ',';
    row += format_fixed(v);
  }
  return row;
}

void write_run_log(std::ostream& out, const std::vector<TickReport>& reports) {
  out << kRunLogHeader << '\n';
  for (const TickReport& r : reports)
    for (const StateUpdate& u : r.snapshot) out << format_run_row(u) << '\n';
}

}  // namespace energytwin
