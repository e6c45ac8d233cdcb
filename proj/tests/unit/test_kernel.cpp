#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "energytwin/errors.hpp"
#include "energytwin/kernel.hpp"

using namespace energytwin;

namespace {

StateUpdate update_for(const std::string& name, std::int64_t tick, double gen = 0.0) {
  StateUpdate u;
  u.agent = AgentId{name};
  u.tick = Tick{tick};
  u.generation_kw = gen;
  return u;
}

class Recorder : public Agent {
 public:
  Recorder(std::string name, std::vector<std::string>* log) : Agent(AgentId{std::move(name)}), log_(log) {}

  void on_phase(Phase phase, TickContext& ctx) override {
    if (phase == Phase::Weather) {
      for (const auto& e : ctx.bus.take(id()))
        if (e.performative == Performative::Tick) ++ticks_seen;
    }
    log_->push_back(std::string(to_string(phase)) + ":" + id().str());
  }

  StateUpdate state_update(Tick tick) const override { return update_for(id().str(), tick.index, 1.0); }

  int ticks_seen = 0;

 private:
  std::vector<std::string>* log_;
};

class Silent : public Agent {
 public:
  using Agent::Agent;
  StateUpdate state_update(Tick tick) const override { return update_for(id().str(), tick.index); }
  void publish(TickContext&) override {}
};

}  // namespace

TEST(Registry, ReadYourWrite) {
  AgentStateRegistry reg;
  reg.register_agent(AgentId{"PVMain"});
  reg.begin_tick(Tick{0});
  const auto u = update_for("PVMain", 0, 12.5);
  reg.publish(u);
  EXPECT_EQ(reg.query(AgentId{"PVMain"}).generation_kw, 12.5);
  EXPECT_TRUE(reg.published_this_tick(AgentId{"PVMain"}));
}

TEST(Registry, SecondPublishInATickIsRejected) {
  AgentStateRegistry reg;
  reg.register_agent(AgentId{"PVMain"});
  reg.begin_tick(Tick{0});
  reg.publish(update_for("PVMain", 0));
  EXPECT_THROW(reg.publish(update_for("PVMain", 0)), DuplicateUpdate);
}

TEST(Registry, WrongTickIsStale) {
  AgentStateRegistry reg;
  reg.register_agent(AgentId{"PVMain"});
  reg.begin_tick(Tick{3});
  EXPECT_THROW(reg.publish(update_for("PVMain", 2)), StaleUpdate);
  EXPECT_THROW(reg.publish(update_for("PVMain", 4)), StaleUpdate);
}

TEST(Registry, UnknownAgentRejected) {
  AgentStateRegistry reg;
  reg.begin_tick(Tick{0});
  EXPECT_THROW(reg.publish(update_for("Ghost", 0)), UnknownAgent);
  EXPECT_THROW(reg.query(AgentId{"Ghost"}), UnknownAgent);
}

TEST(Registry, SettleNeedsEveryAgent) {
  AgentStateRegistry reg;
  reg.register_agent(AgentId{"A"});
  reg.register_agent(AgentId{"B"});
  reg.begin_tick(Tick{0});
  reg.publish(update_for("B", 0));
  EXPECT_THROW(reg.settle(), UnsettledTick);
  reg.publish(update_for("A", 0));
  const auto snap = reg.settle();
  ASSERT_EQ(snap.size(), 2u);
  EXPECT_EQ(snap[0].agent.str(), "A");
  EXPECT_EQ(snap[1].agent.str(), "B");
  EXPECT_EQ(reg.history().size(), 1u);
}

TEST(Registry, TicksMustIncrease) {
  AgentStateRegistry reg;
  reg.register_agent(AgentId{"A"});
  reg.begin_tick(Tick{0});
  reg.publish(update_for("A", 0));
  reg.settle();
  EXPECT_THROW(reg.begin_tick(Tick{0}), StaleUpdate);
}

TEST(Bus, TickFanOutToSevenAgents) {
  MessageBus bus;
  bus.register_topic("tick");
  std::vector<AgentId> subs;
  for (const char* n : {"Aggregator", "CampusBuilding", "ExternalGrid", "Forecaster", "MainBattery", "PVMain", "Weather"})
    subs.emplace_back(n);
  EXPECT_EQ(bus.broadcast_topic("tick", Envelope{AgentId{"Orchestrator"}, {}, Performative::Tick, {}, {}}, subs), 7u);
  for (const auto& s : subs) EXPECT_EQ(bus.take(s).size(), 1u);
}

TEST(Bus, EmptySubscriberListIsFine) {
  MessageBus bus;
  bus.register_topic("weather");
  EXPECT_EQ(bus.broadcast_topic("weather", Envelope{}, {}), 0u);
  EXPECT_TRUE(bus.trace().empty());
}

TEST(Bus, DeliveryFollowsAgentIdOrder) {
  MessageBus bus;
  bus.register_topic("t");
  bus.broadcast_topic("t", Envelope{}, {AgentId{"B"}, AgentId{"A"}, AgentId{"C"}});
  ASSERT_EQ(bus.trace().size(), 3u);
  EXPECT_EQ(bus.trace()[0].to, "A");
  EXPECT_EQ(bus.trace()[1].to, "B");
  EXPECT_EQ(bus.trace()[2].to, "C");
}

TEST(Bus, UnknownTopic) {
  MessageBus bus;
  EXPECT_THROW(bus.broadcast_topic("nope", Envelope{}, {}), UnknownTopic);
  EXPECT_THROW(bus.subscribe("nope", AgentId{"A"}), UnknownTopic);
}

TEST(Bus, PointToPointSortedByPhaseThenSender) {
  MessageBus bus;
  bus.send(Envelope{AgentId{"Z"}, "X", Performative::Inform, "c", {}});
  bus.send(Envelope{AgentId{"B"}, "X", Performative::Propose, "c", {}});
  bus.send(Envelope{AgentId{"A"}, "X", Performative::Refuse, "c", {}});
  bus.send(Envelope{AgentId{"M"}, "X", Performative::Cfp, "c", {}});
  EXPECT_TRUE(bus.take(AgentId{"X"}).empty());
  bus.deliver();
  const auto mail = bus.take(AgentId{"X"});
  ASSERT_EQ(mail.size(), 4u);
  EXPECT_EQ(mail[0].from.str(), "M");
  EXPECT_EQ(mail[1].from.str(), "A");
  EXPECT_EQ(mail[2].from.str(), "B");
  EXPECT_EQ(mail[3].from.str(), "Z");
}

TEST(Bus, TakeIfLeavesTheRest) {
  MessageBus bus;
  bus.send(Envelope{AgentId{"A"}, "X", Performative::Inform, "1", {}});
  bus.send(Envelope{AgentId{"B"}, "X", Performative::Cfp, "2", {}});
  bus.deliver();
  const auto informs =
      bus.take_if(AgentId{"X"}, [](const Envelope& e) { return e.performative == Performative::Inform; });
  ASSERT_EQ(informs.size(), 1u);
  EXPECT_EQ(informs[0].conversation_id, "1");
  const auto rest = bus.take(AgentId{"X"});
  ASSERT_EQ(rest.size(), 1u);
  EXPECT_EQ(rest[0].conversation_id, "2");
}

TEST(Orchestrator, EveryTickSnapshotsEveryAgent) {
  std::vector<std::string> log;
  Orchestrator orch(3);
  auto& b = orch.emplace_agent<Recorder>("B", &log);
  orch.emplace_agent<Recorder>("A", &log);
  orch.emplace_agent<Recorder>("C", &log);
  const auto report = orch.advance_tick();
  EXPECT_EQ(report.tick, Tick{0});
  ASSERT_EQ(report.snapshot.size(), 3u);
  EXPECT_EQ(report.snapshot[0].agent.str(), "A");
  EXPECT_EQ(b.ticks_seen, 1);
}

TEST(Orchestrator, PhasesRunInOrderAndAgentsByName) {
  std::vector<std::string> log;
  Orchestrator orch(1);
  orch.emplace_agent<Recorder>("B", &log);
  orch.emplace_agent<Recorder>("A", &log);
  orch.advance_tick();
  const std::vector<std::string> expected = {"weather:A",    "weather:B",    "assets:A",    "assets:B",
                                             "controller:A", "controller:B", "actuation:A", "actuation:B"};
  EXPECT_EQ(log, expected);
}

TEST(Orchestrator, MissingPublishIsUnsettled) {
  Orchestrator orch(2);
  orch.emplace_agent<Silent>(AgentId{"Mute"});
  EXPECT_THROW(orch.advance_tick(), UnsettledTick);
}

TEST(Orchestrator, StopsAtRunLength) {
  std::vector<std::string> log;
  Orchestrator orch(2);
  orch.emplace_agent<Recorder>("A", &log);
  orch.advance_tick();
  orch.advance_tick();
  EXPECT_TRUE(orch.finished());
  EXPECT_THROW(orch.advance_tick(), UnsettledTick);
  EXPECT_EQ(orch.reports().size(), 2u);
}

TEST(Orchestrator, DuplicateAgentNamesRejected) {
  std::vector<std::string> log;
  Orchestrator orch(1);
  orch.emplace_agent<Recorder>("A", &log);
  EXPECT_THROW(orch.emplace_agent<Recorder>("A", &log), SimError);
}

TEST(RunLog, SixDecimalsAndHeader) {
  std::vector<std::string> log;
  Orchestrator orch(2);
  orch.emplace_agent<Recorder>("A", &log);
  orch.advance_tick();
  orch.advance_tick();
  std::ostringstream out;
  write_run_log(out, orch.reports());
  EXPECT_EQ(out.str(),
            "tick,agent,generation_kw,consumption_kw,stored_kwh,soc_percent\n"
            "0,A,1.000000,0.000000,0.000000,0.000000\n"
            "1,A,1.000000,0.000000,0.000000,0.000000\n");
}

TEST(RunLog, FormattingFoldsNegativeZero) {
  EXPECT_EQ(format_fixed(-0.0), "0.000000");
  EXPECT_EQ(format_fixed(-1e-9), "0.000000");
  EXPECT_EQ(format_fixed(1.23456789), "1.234568");
  EXPECT_EQ(round_fixed(1.23456789), 1.234568);
}
