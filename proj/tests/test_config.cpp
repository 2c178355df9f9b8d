#include "doctest.h"

#include "helpers.hpp"

#include "dsync/config.hpp"
#include "dsync/report.hpp"

using namespace dsync;

TEST_SUITE("config") {

TEST_CASE("sections prefix keys and comments are ignored") {
  auto cfg = parse_config(R"(
# run settings
[tree]
max_depth = 3
min_samples_leaf = 2   # small leaves

[extract]
tau_s = 20
tau_g = 0.05

[sim]
seed = 9
horizon = 250
policy = "lifo"

[log]
iso_time = true
)");
  CHECK(cfg.tree.max_depth == 3);
  CHECK(cfg.tree.min_samples_leaf == 2);
  CHECK(cfg.extract.tau_s == 20);
  CHECK(cfg.extract.tau_g == 0.05);
  CHECK(cfg.sim.seed == 9);
  CHECK(cfg.sim.horizon == 250);
  CHECK(cfg.sim.policy == Policy::Lifo);
  CHECK(cfg.csv.iso_time);
  CHECK(cfg.extract.min_coverage == 0.95);
}

TEST_CASE("unknown keys and bad values name the line") {
  try {
    parse_config("[tree]\nmax_depth = 3\ncolour = blue\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("tree.colour") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[sim]\nseed = -1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[tree]\nmax_depth = 2.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[sim\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("just words\n"), ValidationError);
}

TEST_CASE("single settings override a base") {
  RunConfig cfg;
  set_option(cfg, "extract.min_coverage", "0.9");
  set_option(cfg, "sim.horizon", "inf");
  CHECK(cfg.extract.min_coverage == 0.9);
  CHECK(std::isinf(cfg.sim.horizon));
  CHECK_THROWS_AS(set_option(cfg, "sim.policy", "random"), ValidationError);
}

TEST_CASE("validation collects problems from every section") {
  RunConfig cfg;
  CHECK(validate(cfg).empty());
  cfg.tree.max_depth = 0;
  cfg.extract.tau_g = 1;
  cfg.sim.max_cases = 0;
  CHECK(validate(cfg).size() == 3);
}

TEST_CASE("config json carries every setting") {
  auto j = to_json(RunConfig{});
  CHECK(j["tree"]["max_depth"] == 5);
  CHECK(j["extract"]["tau_s"] == 10);
  CHECK(j["extract"]["tau_g"] == 0.1);
  CHECK(j["sim"]["horizon"] == "inf");
  CHECK(j["sim"]["policy"] == "fifo");
}

TEST_CASE("missing config file is an I/O error") {
  CHECK_THROWS_AS(load_config("/nonexistent/dsync.conf"), IoError);
}

}

TEST_SUITE("value") {

TEST_CASE("numbers print shortest and parse back exactly") {
  for (double v : {0.0, 1.5, -2.25, 1e9, 0.1, 1.0 / 3.0, 2.0054624921439483}) {
    auto text = format_number(v);
    CHECK(parse_number(text) == v);
  }
  CHECK(format_number(4.5) == "4.5");
  CHECK(format_number(100) == "100");
}

TEST_CASE("strict parsing of numbers and booleans") {
  CHECK_FALSE(parse_number("").has_value());
  CHECK_FALSE(parse_number("12abc").has_value());
  CHECK_FALSE(parse_number("inf").has_value());
  CHECK_FALSE(parse_number("nan").has_value());
  CHECK(parse_number(" 3") == std::nullopt);
  CHECK(parse_bool("true") == true);
  CHECK(parse_bool("false") == false);
  CHECK_FALSE(parse_bool("FALSE").has_value());
  CHECK_FALSE(parse_bool("yes").has_value());
}

}

TEST_SUITE("report") {

TEST_CASE("discovery report has every section") {
  auto result = discover(testing::job_queue(), testing::bundled("priority"), TreeParams{}, ExtractionParams{});
  auto j = discovery_report(result, RunConfig{}, "models/priority.json", "data/job_queue.csv");
  for (auto key : {"model", "log", "config", "notes", "replay", "candidates", "trees", "constraints", "replayability",
                   "skipped"})
    CHECK(j.contains(key));
  CHECK(j["notes"]["time_until_next_without_pending_token"] == 1e9);
  CHECK(j["notes"]["ratio_denominator_floor"] == 0.01);
  CHECK(j["replay"]["matched"] == 9);
  CHECK(j["constraints"].empty());
}

TEST_CASE("markdown table lines up modeled and discovered guards") {
  nlohmann::json doc = {
      {"constraints",
       {{{"transition", "pre-processing"}, {"kind", "blocking"}, {"constraint", "nrtokens(q1) <= 4.5"}}}},
      {"replayability", {{"matched", 10}, {"unmatched", 0}}}};
  auto net = testing::bundled("blocking");
  auto md = markdown_report(doc, &net);
  CHECK(md.find("| blocking | pre-processing | `nrtokens(q1) < 5` | `nrtokens(q1) <= 4.5` |") != std::string::npos);
  CHECK(md.find("10 matched, 0 unmatched") != std::string::npos);
  auto bare = markdown_report(doc, nullptr);
  CHECK(bare.find("| blocking | pre-processing | none |") != std::string::npos);
}

}
