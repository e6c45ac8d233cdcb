#pragma once

#include <any>
#include <functional>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "energytwin/types.hpp"

namespace energytwin {

enum class Performative {
  Tick,
  StateUpdate,
  Cfp,
  Propose,
  Refuse,
  AcceptProposal,
  RejectProposal,
  Inform,
  ForecastRequest,
  ForecastReply,
};

std::string_view to_string(Performative p);

/// Rank used to order deliveries within a phase; lower ranks go first.
int delivery_rank(Performative p);

struct Envelope {
  AgentId from;
  std::string to;  // agent name or topic name
  Performative performative = Performative::Inform;
  std::string conversation_id;
  std::any payload;
};

struct StateUpdate {
  AgentId agent;
  Tick tick;
  double generation_kw = 0.0;
  double consumption_kw = 0.0;
  double stored_kwh = 0.0;
  double soc_percent = 0.0;
};

// ---------------------------------------------------------------------------

/// Latest state per agent plus the full per-tick history.
class AgentStateRegistry {
 public:
  void register_agent(const AgentId& id);
  const std::vector<AgentId>& agents() const { return agents_; }

  void begin_tick(Tick tick);
  Tick current_tick() const { return current_; }

  /// Throws StaleUpdate (wrong tick), DuplicateUpdate or UnknownAgent.
  void publish(const StateUpdate& update);

  /// Latest update from `agent`. Throws UnknownAgent if it never published.
  const StateUpdate& query(const AgentId& agent) const;
  bool published_this_tick(const AgentId& agent) const;

  /// Closes the current tick. Throws UnsettledTick if any agent is missing.
  /// The returned snapshot is sorted by AgentId and appended to history().
  std::vector<StateUpdate> settle();

  const std::vector<std::vector<StateUpdate>>& history() const { return history_; }

 private:
  std::vector<AgentId> agents_;
  Tick current_{0};
  bool open_ = false;
  std::map<AgentId, StateUpdate> latest_;
  std::map<AgentId, StateUpdate> pending_;
  std::vector<std::vector<StateUpdate>> history_;
};

// ---------------------------------------------------------------------------

/// In-process message routing: topic fan-out and queued point-to-point mail.
class MessageBus {
 public:
  void register_topic(const std::string& topic);
  bool has_topic(const std::string& topic) const { return topics_.count(topic) != 0; }
  void subscribe(const std::string& topic, const AgentId& agent);
  std::vector<AgentId> subscribers(const std::string& topic) const;

  /// Delivers one copy of `envelope` to each subscriber, in AgentId order.
  /// Returns the number of deliveries. Throws UnknownTopic.
  std::size_t broadcast_topic(const std::string& topic, const Envelope& envelope,
                              std::vector<AgentId> subscribers);

  /// Queues a point-to-point message; it becomes visible after deliver().
  void send(Envelope envelope);

  /// Moves queued mail into mailboxes ordered by (delivery rank, sender).
  void deliver();

  /// Removes and returns everything in `agent`'s mailbox.
  std::vector<Envelope> take(const AgentId& agent);

  /// Removes and returns only the envelopes matching `keep`.
  std::vector<Envelope> take_if(const AgentId& agent, const std::function<bool(const Envelope&)>& keep);

  /// Mail is tick-scoped; anything unread is dropped here.
  void clear_mailboxes() { mailboxes_.clear(); }

  /// Every delivered envelope in delivery order. The orchestrator clears it
  /// at the start of each tick.
  const std::vector<Envelope>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }

 private:
  std::set<std::string> topics_;
  std::map<std::string, std::set<AgentId>> subscriptions_;
  std::vector<Envelope> pending_;
  std::map<AgentId, std::vector<Envelope>> mailboxes_;
  std::vector<Envelope> trace_;
};

// ---------------------------------------------------------------------------

enum class Phase { Weather, Assets, Controller, Actuation, Publish };

std::string_view to_string(Phase p);

struct TickContext {
  Tick tick;
  MessageBus& bus;
  AgentStateRegistry& registry;
};

class Agent {
 public:
  explicit Agent(AgentId id) : id_(std::move(id)) {}
  virtual ~Agent() = default;

  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const AgentId& id() const { return id_; }

  virtual void on_phase(Phase phase, TickContext& ctx);

  /// State reported at the end of `tick`.
  virtual StateUpdate state_update(Tick tick) const = 0;

  /// Default publish step: send STATE_UPDATE to the registry.
  virtual void publish(TickContext& ctx);

 private:
  AgentId id_;
};

struct TickReport {
  Tick tick;
  std::vector<StateUpdate> snapshot;
};

/// Lockstep tick driver. Each tick runs the phases in order, visiting agents
/// in AgentId order and delivering mail between phases:
///   weather -> assets -> controller -> actuation -> publish -> log
class Orchestrator {
 public:
  static constexpr std::string_view kTickTopic = "tick";
  static constexpr std::string_view kRegistryId = "AgentStateRegistry";

  explicit Orchestrator(std::int64_t run_length);

  Agent& add_agent(std::unique_ptr<Agent> agent);

  template <typename T, typename... Args>
  T& emplace_agent(Args&&... args) {
    return static_cast<T&>(add_agent(std::make_unique<T>(std::forward<Args>(args)...)));
  }

  /// Runs one full tick. Throws UnsettledTick if an agent failed to publish.
  TickReport advance_tick();

  Tick current_tick() const { return current_; }
  std::int64_t run_length() const { return run_length_; }
  bool finished() const { return current_.index >= run_length_; }

  MessageBus& bus() { return bus_; }
  AgentStateRegistry& registry() { return registry_; }
  const std::vector<TickReport>& reports() const { return reports_; }

 private:
  std::int64_t run_length_;
  Tick current_{0};
  std::vector<std::unique_ptr<Agent>> agents_;  // kept sorted by id
  MessageBus bus_;
  AgentStateRegistry registry_;
  std::vector<TickReport> reports_;
};

// ---------------------------------------------------------------------------
// Run log

inline constexpr std::string_view kRunLogHeader =
    "tick,agent,generation_kw,consumption_kw,stored_kwh,soc_percent";

/// Fixed six-decimal rendering used by every CSV the simulator writes.
std::string format_fixed(double value);

/// Value after a round trip through format_fixed.
double round_fixed(double value);

std::string format_run_row(const StateUpdate& update);

void write_run_log(std::ostream& out, const std::vector<TickReport>& reports);

}  // namespace energytwin
