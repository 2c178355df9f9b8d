#include "doctest.h"

#include "helpers.hpp"

#include "dsync/replay.hpp"

using namespace dsync;
using testing::case_token;
using testing::net_from;
using testing::resource_token;

namespace {

const char* kQueueNet = R"({
  "places": [{"id": "q1", "kind": "case"}, {"id": "r1", "kind": "resource"}],
  "transitions": [{"id": "handling", "delay": 7}],
  "flows": [["q1", "handling"], ["r1", "handling"], ["handling", "r1"]]
})";

Event event(const std::string& c, const std::string& label, double start, std::optional<std::string> res = {}) {
  Event e;
  e.case_id = c;
  e.label = label;
  e.start = start;
  e.complete = start + 1;
  e.resource = res;
  return e;
}

Binding binding(Token job, Token worker) { return Binding{{"q1", std::move(job)}, {"r1", std::move(worker)}}; }

}  // namespace

TEST_SUITE("replay") {

TEST_CASE("a case match outranks everything else") {
  auto net = net_from(kQueueNet);
  auto e = event("3", "handling", 5);
  auto job1 = sim_score(net, "handling", binding(case_token("1", 5), resource_token("w1")), e);
  auto job3 = sim_score(net, "handling", binding(case_token("3", 0), resource_token("w1")), e);
  CHECK(job1 < job3);
  CHECK(job3.case_match);
}

TEST_CASE("the logged resource breaks ties between workers") {
  auto net = net_from(kQueueNet);
  auto e = event("3", "handling", 5, "w2");
  auto w1 = sim_score(net, "handling", binding(case_token("3"), resource_token("w1")), e);
  auto w2 = sim_score(net, "handling", binding(case_token("3"), resource_token("w2")), e);
  CHECK(w1 < w2);
  CHECK(w2.resource_match == 1);
  CHECK(w1.resource_match == -1);
}

TEST_CASE("tokens available before the event start are preferred") {
  auto net = net_from(R"({"places": [{"id": "q1", "kind": "case"}, {"id": "stock", "kind": "case"}],
                          "transitions": [{"id": "assemble", "case_source": "q1"}],
                          "flows": [["q1", "assemble"], ["stock", "assemble"]]})");
  auto e = event("3", "assemble", 5);
  Binding early{{"q1", case_token("3")}, {"stock", case_token("s1", 4)}};
  Binding late{{"q1", case_token("3")}, {"stock", case_token("s2", 6)}};
  CHECK(sim_score(net, "assemble", late, e) < sim_score(net, "assemble", early, e));
}

TEST_CASE("the job queue log over the job net yields the state samples of the example") {
  auto r = replay(testing::job_queue(), testing::bundled("priority"));
  CHECK(r.report.matched == 9);
  CHECK(r.report.unmatched.empty());
  std::vector<double> times;
  for (const auto& s : r.samples) times.push_back(s.time);
  CHECK(times == std::vector<double>{0, 5, 10, 15, 20, 22, 25, 30});

  auto at = [&](double t) -> const StateSample& {
    return *std::find_if(r.samples.begin(), r.samples.end(), [&](const StateSample& s) { return s.time == t; });
  };
  CHECK_FALSE(at(5).fired.count("handling"));
  CHECK(at(15).fired.count("handling"));
  CHECK(at(22).fired.count("handling"));
  for (const auto& s : r.samples) CHECK_FALSE(s.flagged);

  // job 3 (855) has left arrival and sits in the queue when handling decides at 15
  const auto& d15 = at(15).decision.at("handling");
  CHECK(eval_feature_number(parse_feature("attrval(q1,value,max)"), d15, 15) == 855);
  CHECK(eval_feature_number(parse_feature("attrval(arrival,value,max)"), d15, 15) == 146);
}

TEST_CASE("sample times strictly increase") {
  auto r = replay(testing::job_queue(), testing::bundled("priority"));
  for (std::size_t i = 1; i < r.samples.size(); ++i) CHECK(r.samples[i - 1].time < r.samples[i].time);
}

TEST_CASE("empty log replays to nothing") {
  auto r = replay(Log{}, testing::bundled("priority"));
  CHECK(r.samples.empty());
  CHECK(r.report.matched == 0);
  CHECK(r.report.total() == 0);
  CHECK(r.report.match_rate() == 1.0);
}

TEST_CASE("an event whose case token never existed is unmatched") {
  auto log = make_log({event("99", "handling", 3)}, {});
  auto r = replay(log, testing::bundled("priority"));
  REQUIRE(r.report.unmatched.size() == 1);
  CHECK(r.report.unmatched[0].reason == "no binding");
  CHECK(r.report.unmatched[0].event.case_id == "99");
  REQUIRE(r.samples.size() == 1);
  CHECK(r.samples[0].flagged);
}

TEST_CASE("a violated guard is reported when guards are checked") {
  auto net = testing::bundled("blocking").with_guard("pre-processing", parse_constraint("nrtokens(q1) <= 0"));
  auto log = parse_log("case,activity,start,complete\n1,arrive,0,1\n1,pre-processing,1,6\n2,arrive,1,2\n"
                       "2,pre-processing,6,11\n");
  auto unchecked = replay(log, net);
  CHECK(unchecked.report.unmatched.empty());
  auto checked = replay(log, net, ReplayOptions{true});
  REQUIRE(checked.report.unmatched.size() == 1);
  CHECK(checked.report.unmatched[0].event.case_id == "2");
  CHECK(checked.report.unmatched[0].reason == "guard");
}

TEST_CASE("labels that are not task transitions are rejected") {
  auto log = make_log({event("1", "teleport", 0)}, {});
  CHECK_THROWS_AS(replay(log, testing::bundled("priority")), ValidationError);
  auto arrive = make_log({event("1", "arrive", 0)}, {});
  CHECK_THROWS_AS(replay(arrive, testing::bundled("priority")), ValidationError);
}

TEST_CASE("arrivals of a silent source are inferred from first events") {
  auto r = replay(testing::job_queue(), testing::bundled("priority"));
  CHECK(r.report.inferred_arrivals == 7);
}

TEST_CASE("matched plus unmatched covers every task event") {
  auto log = parse_log("case,activity,start,complete\n1,pre-processing,0,5\n1,handling,5,12\n2,handling,6,13\n");
  auto r = replay(log, testing::bundled("priority"));
  CHECK(r.report.total() == log.events.size());
  CHECK(r.report.unmatched.size() == 1);
}

}
