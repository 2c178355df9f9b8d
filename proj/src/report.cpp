#include "dsync/report.hpp"

#include <map>
#include <set>

namespace dsync {

using nlohmann::ordered_json;

ordered_json to_json(const MatchReport& r) {
  ordered_json j;
  j["matched"] = r.matched;
  j["unmatched"] = r.unmatched.size();
  j["match_rate"] = r.match_rate();
  j["inferred_arrivals"] = r.inferred_arrivals;
  j["exact_time_matches"] = r.exact_time_matches;
  j["mean_time_gap"] = r.mean_time_gap;
  auto list = ordered_json::array();
  for (const auto& u : r.unmatched)
    list.push_back({{"case", u.event.case_id},
                    {"activity", u.event.label},
                    {"start", u.event.start},
                    {"reason", u.reason}});
  j["unmatched_events"] = list;
  return j;
}

namespace {

ordered_json atom_json(const SplitAtom& a) {
  return {{"condition", a.text()}, {"slot", a.slot}, {"delta_gini", a.delta_gini}, {"node", a.node}};
}

ordered_json candidate_json(const PatternCandidate& c) {
  ordered_json j;
  j["id"] = c.id();
  j["kind"] = std::string(to_string(c.kind));
  j["transition"] = c.t_g;
  j["roles"] = c.roles;
  if (!c.attr.empty()) j["attr"] = c.attr;
  return j;
}

}  // namespace

ordered_json to_json(const PatternConstraint& pc) {
  ordered_json j;
  j["kind"] = std::string(to_string(pc.candidate.kind));
  j["transition"] = pc.candidate.t_g;
  j["candidate"] = pc.candidate.id();
  j["constraint"] = to_string(pc.expr);
  j["support"] = pc.support;
  j["coverage"] = pc.coverage;
  auto prov = ordered_json::array();
  for (const auto& a : pc.provenance) prov.push_back(atom_json(a));
  j["provenance"] = prov;
  return j;
}

ordered_json discovery_report(const DiscoveryResult& result, const RunConfig& cfg, const std::string& model,
                              const std::string& log) {
  ordered_json j;
  j["model"] = model;
  j["log"] = log;
  j["config"] = to_json(cfg);
  j["notes"] = {{"time_until_next_without_pending_token", kNoPendingToken},
                {"ratio_denominator_floor", kRatioEpsilon}};
  j["replay"] = to_json(result.replay_report);

  auto candidates = ordered_json::array();
  auto trees = ordered_json::object();
  auto skipped = ordered_json::array();
  for (const auto& o : result.outcomes) {
    auto c = candidate_json(o.candidate);
    c["rows"] = o.rows;
    c["true_rows"] = o.n_true;
    c["false_rows"] = o.n_false;
    c["status"] = o.status;
    auto atoms = ordered_json::array();
    for (const auto& a : o.atoms) atoms.push_back(atom_json(a));
    c["retained_splits"] = atoms;
    c["false_leaves"] = o.false_leaves;
    candidates.push_back(std::move(c));
    if (o.tree) trees[o.candidate.id()] = to_json(*o.tree);
    if (!o.tree) skipped.push_back({{"candidate", o.candidate.id()}, {"reason", o.status}});
  }
  j["candidates"] = candidates;
  j["trees"] = trees;
  auto constraints = ordered_json::array();
  for (const auto& pc : result.constraints) constraints.push_back(to_json(pc));
  j["constraints"] = constraints;
  j["replayability"] = to_json(result.replayability);
  j["skipped"] = skipped;
  return j;
}

std::string summary_text(const DiscoveryResult& result) {
  std::string out;
  const auto& r = result.replay_report;
  out += "replay: " + std::to_string(r.matched) + " matched, " + std::to_string(r.unmatched.size()) + " unmatched\n";
  std::size_t skipped = 0, mined = 0;
  for (const auto& o : result.outcomes) (o.tree ? mined : skipped)++;
  out += "candidates: " + std::to_string(result.outcomes.size()) + " (" + std::to_string(mined) + " mined, " +
         std::to_string(skipped) + " skipped)\n";
  out += "constraints: " + std::to_string(result.constraints.size()) + "\n";
  for (const auto& pc : result.constraints)
    out += "  " + std::string(to_string(pc.candidate.kind)) + " on " + pc.candidate.t_g + ": " + to_string(pc.expr) +
           "\n";
  const auto& rp = result.replayability;
  out += "replayability with discovered guards: " + std::to_string(rp.matched) + "/" + std::to_string(rp.total()) +
         " log moves matched\n";
  return out;
}

std::string markdown_report(const nlohmann::json& report, const Net* reference) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> discovered;
  std::set<std::string> transitions;
  for (const auto& c : report.at("constraints")) {
    auto t = c.at("transition").get<std::string>();
    discovered[t].emplace_back(c.at("kind").get<std::string>(), c.at("constraint").get<std::string>());
    transitions.insert(t);
  }
  std::map<std::string, std::string> modeled;
  if (reference)
    for (const auto& [t, g] : ground_truth(*reference)) {
      modeled[t] = to_string(g);
      transitions.insert(t);
    }
  std::string out = "| Pattern | Transition | Modeled constraint | Discovered constraint |\n|---|---|---|---|\n";
  for (const auto& t : transitions) {
    auto model = modeled.count(t) ? "`" + modeled[t] + "`" : std::string("none");
    auto it = discovered.find(t);
    if (it == discovered.end()) {
      out += "| none | " + t + " | " + model + " | none |\n";
      continue;
    }
    for (const auto& [kind, text] : it->second) out += "| " + kind + " | " + t + " | " + model + " | `" + text + "` |\n";
  }
  const auto& rp = report.at("replayability");
  out += "\nReplayability with discovered guards: " + std::to_string(rp.at("matched").get<std::size_t>()) + " matched, " +
         std::to_string(rp.at("unmatched").get<std::size_t>()) + " unmatched.\n";
  return out;
}

}  // namespace dsync
