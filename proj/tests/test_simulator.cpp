#include "doctest.h"

#include "helpers.hpp"

#include "dsync/replay.hpp"
#include "dsync/simulator.hpp"

using namespace dsync;
using testing::net_from;

namespace {

SimConfig config(std::uint64_t seed, std::size_t max_cases) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.max_cases = max_cases;
  return cfg;
}

std::vector<Event> of(const Log& log, const std::string& label) {
  std::vector<Event> out;
  for (const auto& e : log.events)
    if (e.label == label) out.push_back(e);
  return out;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("constant-rate source stops after three cases") {
  auto net = net_from(R"({"places": [{"id": "p", "kind": "case"}],
                          "transitions": [{"id": "arrive", "arrival": {"interarrival": 1}}],
                          "flows": [["arrive", "p"]]})");
  auto log = simulate(net, config(1, 3));
  REQUIRE(log.events.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(log.events[i].label == "arrive");
    CHECK(log.events[i].complete == static_cast<double>(i));
  }
}

TEST_CASE("priority model reproduces the rhythm of the job example") {
  auto log = simulate(testing::bundled("priority"), config(1, 50));
  auto pre = of(log, "pre-processing");
  REQUIRE(pre.size() >= 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(pre[i].start == 5.0 * static_cast<double>(i));
    CHECK(pre[i].complete == pre[i].start + 5);
  }
  auto handling = of(log, "handling");
  REQUIRE_FALSE(handling.empty());
  for (const auto& e : handling) {
    CHECK(e.complete - e.start == 7);
    CHECK(e.resource.has_value());
  }
  for (const auto& e : log.events) {
    double v = as_number(e.attrs.at("value"));
    CHECK(v >= 100);
    CHECK(v <= 1000);
    CHECK(v == std::floor(v));
  }
}

TEST_CASE("handling takes the most valuable enabled job") {
  auto net = testing::bundled("priority");
  auto log = simulate(net, config(3, 200));
  auto replayed = replay(log, net.without_guards());
  std::size_t checked = 0;
  for (const auto& s : replayed.samples) {
    if (!s.fired.count("handling") || s.flagged) continue;
    const auto& m = s.decision.at("handling");
    double best = -1;
    for (const auto& tok : m.tokens("q1"))
      if (tok.enabled_at(s.time)) best = std::max(best, as_number(tok.attrs.at("value")));
    for (const auto& e : log.events)
      if (e.label == "handling" && e.start == s.time) {
        CHECK(as_number(e.attrs.at("value")) <= best);
        ++checked;
      }
  }
  CHECK(checked > 50);
}

TEST_CASE("blocking model never starts pre-processing on a full queue") {
  auto net = testing::bundled("blocking");
  auto log = simulate(net, config(2, 500));
  auto replayed = replay(log, net.without_guards());
  CHECK(replayed.report.unmatched.empty());
  std::size_t starts = 0;
  for (const auto& s : replayed.samples) {
    if (!s.fired.count("pre-processing")) continue;
    ++starts;
    CHECK(s.decision.at("pre-processing").count("q1") < 5);
    CHECK(s.marking.count("q1") <= 5);
  }
  CHECK(starts > 100);
}

TEST_CASE("batch transitions move every enabled token at once") {
  auto log = simulate(testing::bundled("holdbatch"), config(1, 300));
  std::map<double, std::vector<Event>> batches;
  for (const auto& e : of(log, "transportation")) batches[e.start].push_back(e);
  REQUIRE_FALSE(batches.empty());
  for (const auto& [start, events] : batches) {
    CHECK(events.size() >= 4);
    for (const auto& e : events) CHECK(e.complete == events.front().complete);
  }
}

TEST_CASE("same seed gives the same log, another seed does not") {
  auto net = testing::bundled("choice");
  auto a = simulate(net, config(5, 200));
  auto b = simulate(net, config(5, 200));
  auto c = simulate(net, config(6, 200));
  CHECK(write_log(a) == write_log(b));
  CHECK(write_log(a) != write_log(c));
}

TEST_CASE("horizon bounds event starts") {
  SimConfig cfg;
  cfg.max_cases = 0;
  cfg.horizon = 100;
  auto log = simulate(testing::bundled("blocking"), cfg);
  REQUIRE_FALSE(log.events.empty());
  for (const auto& e : log.events) CHECK(e.start <= 100);
}

TEST_CASE("invalid configurations are rejected") {
  SimConfig cfg;
  cfg.horizon = 0;
  CHECK_FALSE(validate_config(cfg).empty());
  cfg.horizon = -3;
  CHECK_THROWS_AS(simulate(testing::bundled("blocking"), cfg), ValidationError);
  SimConfig unbounded;
  unbounded.max_cases = 0;
  CHECK_FALSE(validate_config(unbounded).empty());
  CHECK(validate_config(SimConfig{}).empty());
}

TEST_CASE("a net that cannot move is a deadlock") {
  auto net = net_from(R"({"places": [{"id": "p", "kind": "case"}],
                          "transitions": [{"id": "t"}], "flows": [["p", "t"]]})");
  CHECK_THROWS_AS(simulate(net, SimConfig{}), SimulationError);
}

TEST_CASE("log schema lists only attributes present in events") {
  auto log = simulate(testing::bundled("supplychain"), config(1, 200));
  REQUIRE(log.schema.size() == 1);
  CHECK(log.schema[0].name == "priority");
}

TEST_CASE("events are emitted for task transitions only") {
  auto net = testing::bundled("priority");
  auto log = simulate(net, config(1, 100));
  for (const auto& e : log.events) {
    const auto* t = net.find_transition(e.label);
    REQUIRE(t);
    CHECK(t->is_task);
    CHECK(e.start <= e.complete);
  }
  CHECK(of(log, "arrive").empty());
}

TEST_CASE("lifo policy changes the order of service") {
  auto net = testing::bundled("blocking");
  auto fifo = config(4, 300);
  auto lifo = fifo;
  lifo.policy = Policy::Lifo;
  CHECK(write_log(simulate(net, fifo)) != write_log(simulate(net, lifo)));
}

}
