#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "energytwin/kernel.hpp"
#include "energytwin/physics.hpp"
#include "energytwin/types.hpp"

namespace energytwin {

enum class Direction { SupplyDeficit, AbsorbSurplus };

std::string_view to_string(Direction d);

struct Cfp {
  std::string conversation_id;
  Direction direction = Direction::SupplyDeficit;
  double quantity_kw = 0.0;
  Tick tick;
  int deadline = 0;  // round counter inside the controller phase
};

// Lower rank wins ties on price.
enum class ResponderKind { Battery = 0, External = 1 };

struct Proposal {
  AgentId responder;
  std::string conversation_id;
  double offered_kw = 0.0;
  double unit_cost = 0.0;
  ResponderKind kind = ResponderKind::External;
};

struct Refusal {
  AgentId responder;
  std::string conversation_id;
  std::string reason;
};

using Response = std::variant<Proposal, Refusal>;

const AgentId& responder_of(const Response& r);

inline constexpr double kMinOfferKw = 1e-6;

/// Deficit: what the cells can deliver this tick. Surplus: remaining headroom.
/// Both capped by C-rate and the requested quantity.
Response respond_battery(const AgentId& id, const BatteryState& state, const BatteryParams& params,
                         double unit_cost, const Cfp& cfp, double dt_hours = kTickHours);

/// Offers up to capacity for deficits and always refuses surplus.
Response respond_external(const AgentId& id, const ExternalSupplyParams& params, const Cfp& cfp);

struct Allocation {
  AgentId responder;
  double awarded_kw = 0.0;
};

struct Award {
  std::string conversation_id;
  std::vector<Allocation> allocations;  // winners only, in award order
  double uncovered_kw = 0.0;

  double total_kw() const;
  double awarded_to(const AgentId& responder) const;
};

/// Optional per-responder ceilings on the awarded amount.
using AwardCaps = std::map<AgentId, double>;

/// Greedy fill ordered by (unit cost, responder kind, AgentId).
Award award_contracts(const Cfp& cfp, const std::vector<Proposal>& proposals, const AwardCaps& caps = {});

// ---------------------------------------------------------------------------

class CnpResponder {
 public:
  virtual ~CnpResponder() = default;
  virtual const AgentId& responder_id() const = 0;
  virtual Response on_cfp(const Cfp& cfp) = 0;
  /// The responder must INFORM the initiator once the contract is executed.
  virtual void on_accept(const Cfp& cfp, double awarded_kw) = 0;
  virtual void on_reject(const Cfp&) {}
};

struct NegotiationRound {
  Cfp cfp;
  std::vector<Response> responses;  // AgentId order
  Award award;
};

/// Initiator side of a single-round contract net, run synchronously over the
/// bus inside one phase.
class ContractNet {
 public:
  ContractNet(AgentId initiator, MessageBus& bus) : initiator_(std::move(initiator)), bus_(bus) {}

  std::string next_conversation_id(Tick tick);

  /// Sends the CFP and returns one reply per responder. Throws MissingResponse.
  std::vector<Response> issue_cfp(const Cfp& cfp, std::vector<CnpResponder*> responders);

  /// Awards, then sends ACCEPT_PROPOSAL / REJECT_PROPOSAL to every proposer.
  Award settle(const Cfp& cfp, const std::vector<Response>& responses, std::vector<CnpResponder*> responders,
               const AwardCaps& caps = {});

  NegotiationRound run(const Cfp& cfp, const std::vector<CnpResponder*>& responders, const AwardCaps& caps = {});

  /// Consumes INFORM replies; throws MissingResponse if an accepted contract
  /// was not reported as executed.
  void collect_informs();

  const AgentId& initiator() const { return initiator_; }

 private:
  AgentId initiator_;
  MessageBus& bus_;
  std::int64_t counter_tick_ = -1;
  int counter_ = 0;
  std::set<std::pair<AgentId, std::string>> awaiting_inform_;
};

// ---------------------------------------------------------------------------
// Negotiation log

inline constexpr std::string_view kNegotiationLogHeader =
    "tick,conversation_id,direction,quantity_kw,responder,response,offered_kw,unit_cost,awarded_kw";

void write_negotiation_rows(std::ostream& out, const NegotiationRound& round);

}  // namespace energytwin
