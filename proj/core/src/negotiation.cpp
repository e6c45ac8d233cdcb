#include "energytwin/negotiation.hpp"

#include <algorithm>
#include <ostream>

#include "energytwin/errors.hpp"

namespace energytwin {

std::string_view to_string(Direction d) {
  return d == Direction::SupplyDeficit ? "SUPPLY_DEFICIT" : "ABSORB_SURPLUS";
}

const AgentId& responder_of(const Response& r) {
  return std::visit([](const auto& x) -> const AgentId& { return x.responder; }, r);
}

Response respond_battery(const AgentId& id, const BatteryState& state, const BatteryParams& params,
                         double unit_cost, const Cfp& cfp, double dt) {
  const double feasible = cfp.direction == Direction::SupplyDeficit ? max_discharge_kw(state, dt, params)
                                                                    : max_charge_kw(state, dt, params);
  if (feasible < kMinOfferKw)
    return Refusal{id, cfp.conversation_id,
                   cfp.direction == Direction::SupplyDeficit ? "no deliverable energy" : "no headroom"};
  return Proposal{id, cfp.conversation_id, std::min(cfp.quantity_kw, feasible), unit_cost, ResponderKind::Battery};
}

Response respond_external(const AgentId& id, const ExternalSupplyParams& params, const Cfp& cfp) {
  if (cfp.direction == Direction::AbsorbSurplus) return Refusal{id, cfp.conversation_id, "does not absorb"};
  const double offer = std::min(cfp.quantity_kw, params.capacity_kw);
  if (offer < kMinOfferKw) return Refusal{id, cfp.conversation_id, "no capacity"};
  return Proposal{id, cfp.conversation_id, offer, params.unit_cost, ResponderKind::External};
}

double Award::total_kw() const {
  double s = 0.0;
  for (const auto& a : allocations) s += a.awarded_kw;
  return s;
}

double Award::awarded_to(const AgentId& responder) const {
  for (const auto& a : allocations)
    if (a.responder == responder) return a.awarded_kw;
  return 0.0;
}

Award award_contracts(const Cfp& cfp, const std::vector<Proposal>& proposals, const AwardCaps& caps) {
  std::vector<const Proposal*> order;
  for (const auto& p : proposals) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const Proposal* a, const Proposal* b) {
    if (a->unit_cost != b->unit_cost) return a->unit_cost < b->unit_cost;
    if (a->kind != b->kind) return a->kind < b->kind;
    return a->responder < b->responder;
  });

  Award award{cfp.conversation_id, {}, 0.0};
  double remaining = cfp.quantity_kw;
  for (const Proposal* p : order) {
    if (remaining <= 0.0) break;
    double amount = std::min(p->offered_kw, remaining);
    if (auto it = caps.find(p->responder); it != caps.end()) amount = std::min(amount, std::max(0.0, it->second));
    if (amount <= 0.0) continue;
    award.allocations.push_back({p->responder, amount});
    remaining -= amount;
  }
  award.uncovered_kw = std::max(0.0, remaining);
  return award;
}

// ---------------------------------------------------------------------------

std::string ContractNet::next_conversation_id(Tick tick) {
  if (tick.index != counter_tick_) {
    counter_tick_ = tick.index;
    counter_ = 0;
  }
  return "cnp-" + std::to_string(tick.index) + "-" + std::to_string(counter_++);
}

namespace {

void sort_by_id(std::vector<CnpResponder*>& rs) {
  std::sort(rs.begin(), rs.end(),
            [](const CnpResponder* a, const CnpResponder* b) { return a->responder_id() < b->responder_id(); });
}

auto in_conversation(const std::string& id, std::initializer_list<Performative> kinds) {
  std::vector<Performative> ks(kinds);
  return [id, ks](const Envelope& e) {
    return e.conversation_id == id && std::find(ks.begin(), ks.end(), e.performative) != ks.end();
  };
}

}  // namespace

std::vector<Response> ContractNet::issue_cfp(const Cfp& cfp, std::vector<CnpResponder*> responders) {
  sort_by_id(responders);
  for (CnpResponder* r : responders)
    bus_.send(Envelope{initiator_, r->responder_id().str(), Performative::Cfp, cfp.conversation_id, cfp});
  bus_.deliver();

  for (CnpResponder* r : responders) {
    for (const Envelope& e : bus_.take_if(r->responder_id(), in_conversation(cfp.conversation_id, {Performative::Cfp}))) {
      Response reply = r->on_cfp(std::any_cast<const Cfp&>(e.payload));
      const Performative kind = std::holds_alternative<Proposal>(reply) ? Performative::Propose : Performative::Refuse;
      bus_.send(Envelope{r->responder_id(), initiator_.str(), kind, cfp.conversation_id, std::move(reply)});
    }
  }
  bus_.deliver();

  std::map<AgentId, Response> by_sender;
  for (const Envelope& e :
       bus_.take_if(initiator_, in_conversation(cfp.conversation_id, {Performative::Propose, Performative::Refuse}))) {
    if (!by_sender.emplace(e.from, std::any_cast<const Response&>(e.payload)).second)
      throw MissingResponse(e.from.str() + " answered " + cfp.conversation_id + " twice");
  }
  std::vector<Response> out;
  for (CnpResponder* r : responders) {
    auto it = by_sender.find(r->responder_id());
    if (it == by_sender.end())
      throw MissingResponse(r->responder_id().str() + " did not answer " + cfp.conversation_id);
    out.push_back(it->second);
  }
  return out;
}

Award ContractNet::settle(const Cfp& cfp, const std::vector<Response>& responses,
                          std::vector<CnpResponder*> responders, const AwardCaps& caps) {
  sort_by_id(responders);
  std::vector<Proposal> proposals;
  for (const auto& r : responses)
    if (const auto* p = std::get_if<Proposal>(&r)) proposals.push_back(*p);
  Award award = award_contracts(cfp, proposals, caps);

  for (const Proposal& p : proposals) {
    const double amount = award.awarded_to(p.responder);
    if (amount > 0.0) {
      bus_.send(Envelope{initiator_, p.responder.str(), Performative::AcceptProposal, cfp.conversation_id, amount});
      awaiting_inform_.emplace(p.responder, cfp.conversation_id);
    } else {
      bus_.send(Envelope{initiator_, p.responder.str(), Performative::RejectProposal, cfp.conversation_id, 0.0});
    }
  }
  bus_.deliver();

  for (CnpResponder* r : responders) {
    auto decisions = bus_.take_if(r->responder_id(), in_conversation(cfp.conversation_id, {Performative::AcceptProposal,
                                                                                           Performative::RejectProposal}));
    for (const Envelope& e : decisions) {
      if (e.performative == Performative::AcceptProposal)
        r->on_accept(cfp, std::any_cast<double>(e.payload));
      else
        r->on_reject(cfp);
    }
  }
  return award;
}

NegotiationRound ContractNet::run(const Cfp& cfp, const std::vector<CnpResponder*>& responders,
                                  const AwardCaps& caps) {
  NegotiationRound round{cfp, issue_cfp(cfp, responders), {}};
  round.award = settle(cfp, round.responses, responders, caps);
  return round;
}

void ContractNet::collect_informs() {
  for (const Envelope& e :
       bus_.take_if(initiator_, [](const Envelope& e) { return e.performative == Performative::Inform; })) {
    awaiting_inform_.erase({e.from, e.conversation_id});
  }
  if (!awaiting_inform_.empty()) {
    const auto& [who, conv] = *awaiting_inform_.begin();
    std::string what = who.str() + " never reported execution of " + conv;
    awaiting_inform_.clear();
    throw MissingResponse(what);
  }
}

// ---------------------------------------------------------------------------

void write_negotiation_rows(std::ostream& out, const NegotiationRound& round) {
  const Cfp& cfp = round.cfp;
  for (const Response& r : round.responses) {
    out << cfp.tick.index << ',' << cfp.conversation_id << ',' << to_string(cfp.direction) << ','
        << format_fixed(cfp.quantity_kw) << ',' << responder_of(r).str() << ',';
    if (const auto* p = std::get_if<Proposal>(&r)) {
      out << "PROPOSE," << format_fixed(p->offered_kw) << ',' << format_fixed(p->unit_cost) << ','
          << format_fixed(round.award.awarded_to(p->responder)) << '\n';
    } else {
      out << "REFUSE,,," << format_fixed(0.0) << '\n';
    }
  }
}

}  // namespace energytwin
