#include "dsync/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dsync {

std::vector<std::string> validate_params(const ExtractionParams& p) {
  std::vector<std::string> out;
  if (p.tau_s < 1) out.push_back("extract tau_s must be >= 1");
  if (!(p.tau_g >= 0 && p.tau_g <= 0.5)) out.push_back("extract tau_g must lie in [0, 0.5]");
  if (!(p.min_coverage >= 0 && p.min_coverage <= 1)) out.push_back("extract min_coverage must lie in [0, 1]");
  return out;
}

std::string SplitAtom::text() const {
  if (op == CmpOp::Eq) return to_string(feature) + (threshold != 0 ? " == true" : " == false");
  return to_string(feature) + " " + std::string(to_string(op)) + " " + format_number(threshold);
}

std::vector<int> select_false_leaves(const Tree& tree, const ExtractionParams& p) {
  std::vector<int> out;
  for (const auto& n : tree.nodes)
    if (n.is_leaf() && !n.prediction() && n.samples >= p.tau_s && n.gini <= p.tau_g) out.push_back(n.id);
  return out;
}

std::vector<SplitAtom> path_conditions(const Tree& tree, int leaf, const std::vector<FeatureRef>& schema) {
  std::vector<SplitAtom> out;
  auto path = tree.path_to(leaf);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto& parent = tree.node(path[k]);
    const auto& child = tree.node(path[k + 1]);
    bool right = parent.right == child.id;
    SplitAtom a;
    a.feature = schema.at(*parent.feature);
    if (a.feature.is_boolean()) {
      a.op = CmpOp::Eq;
      a.threshold = right ? 1 : 0;
    } else {
      a.op = right ? CmpOp::Gt : CmpOp::Le;
      a.threshold = parent.threshold;
    }
    a.delta_gini = child.gini - parent.gini;
    a.node = parent.id;
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

// Template slot a violation condition fills for a pattern kind. Violations are
// the conditions under which t_g is observed waiting.
std::string violation_slot(const SplitAtom& a, PatternKind kind) {
  auto k = a.feature.kind;
  switch (kind) {
    case PatternKind::Priority:
      if (k == FeatureKind::Ratio && a.op == CmpOp::Gt) return "ratio";
      if (k == FeatureKind::AttrEnabled) return "enabled";
      return {};
    case PatternKind::Blocking:
      return k == FeatureKind::NrTokens && a.op == CmpOp::Gt ? "count" : "";
    case PatternKind::HoldBatch:
      if (k == FeatureKind::NrTokensEnabled && a.op == CmpOp::Le) return "count";
      if (k == FeatureKind::TimeUntilNext && a.op == CmpOp::Le) return "time";
      return {};
    case PatternKind::Choice:
      return k == FeatureKind::TimeUntilNext && a.op == CmpOp::Le ? "time" : "";
  }
  return {};
}

std::vector<std::string> required_slots(PatternKind kind) {
  switch (kind) {
    case PatternKind::Priority: return {"ratio", "enabled"};
    case PatternKind::Blocking: return {"count"};
    case PatternKind::HoldBatch: return {"count", "time"};
    case PatternKind::Choice: return {"time"};
  }
  return {};
}

Atom permission(const SplitAtom& a) {
  if (a.feature.is_boolean()) return Atom{a.feature, CmpOp::Eq, true};
  // violation `x > a` permits `x <= a`; violation `x <= a` permits `x > a`
  return Atom{a.feature, a.op == CmpOp::Gt ? CmpOp::Le : CmpOp::Gt, a.threshold};
}

}  // namespace

std::vector<SplitAtom> trace_and_filter(const Tree& tree, int leaf, const std::vector<FeatureRef>& schema,
                                        PatternKind kind) {
  std::vector<SplitAtom> out;
  for (auto& a : path_conditions(tree, leaf, schema)) {
    a.slot = violation_slot(a, kind);
    if (!a.slot.empty() && a.delta_gini < 0) out.push_back(std::move(a));
  }
  return out;
}

std::vector<SplitAtom> collect_violations(const Tree& tree, const std::vector<int>& leaves,
                                          const std::vector<FeatureRef>& schema, PatternKind kind) {
  std::vector<SplitAtom> atoms;
  for (int leaf : leaves)
    for (auto& a : trace_and_filter(tree, leaf, schema, kind))
      if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(std::move(a));
  return atoms;
}

std::vector<SplitAtom> resolve_duplicates(std::vector<SplitAtom> atoms) {
  std::map<std::string, SplitAtom> best;
  for (auto& a : atoms) {
    auto it = best.find(a.slot);
    if (it == best.end()) {
      best.emplace(a.slot, std::move(a));
      continue;
    }
    double cur = std::abs(it->second.delta_gini), cand = std::abs(a.delta_gini);
    if (cand > cur || (cand == cur && a.node < it->second.node)) it->second = std::move(a);
  }
  std::vector<SplitAtom> out;
  for (auto& [slot, a] : best) out.push_back(std::move(a));
  std::sort(out.begin(), out.end(), [](const SplitAtom& x, const SplitAtom& y) { return x.node < y.node; });
  return out;
}

std::optional<PatternConstraint> assemble_constraint(const std::vector<SplitAtom>& atoms, const PatternCandidate& c) {
  PatternConstraint out;
  out.candidate = c;
  for (const auto& slot : required_slots(c.kind)) {
    auto it = std::find_if(atoms.begin(), atoms.end(), [&](const SplitAtom& a) { return a.slot == slot; });
    if (it == atoms.end()) return std::nullopt;
    out.expr.atoms.push_back(permission(*it));
    out.provenance.push_back(*it);
  }
  return out;
}

bool holds_on_row(const Constraint& c, const std::vector<FeatureRef>& schema, const std::vector<double>& row) {
  for (const auto& a : c.atoms) {
    auto it = std::find(schema.begin(), schema.end(), a.feature);
    if (it == schema.end()) throw Error("constraint feature " + to_string(a.feature) + " is not in the row schema");
    double v = row[static_cast<std::size_t>(it - schema.begin())];
    if (!compare(v, a.op, as_number(a.constant))) return false;
  }
  return true;
}

namespace {

void score(PatternConstraint& pc, const PatternTransitionLog& log) {
  std::size_t admitted = 0, positives = 0;
  pc.support = 0;
  for (const auto& r : log.rows) {
    bool ok = holds_on_row(pc.expr, log.schema, r.values);
    if (r.label) {
      ++positives;
      admitted += ok;
    } else if (!ok) {
      ++pc.support;
    }
  }
  pc.coverage = positives ? static_cast<double>(admitted) / static_cast<double>(positives) : 1.0;
}

// Every assembly that picks one retained atom per slot, in order of decreasing
// |delta_gini| per slot.
std::vector<PatternConstraint> alternatives(const std::vector<SplitAtom>& atoms, const PatternCandidate& c) {
  std::map<std::string, std::vector<SplitAtom>> by_slot;
  for (const auto& a : atoms) by_slot[a.slot].push_back(a);
  for (auto& [slot, list] : by_slot)
    std::stable_sort(list.begin(), list.end(), [](const SplitAtom& x, const SplitAtom& y) {
      return std::abs(x.delta_gini) > std::abs(y.delta_gini);
    });
  std::vector<std::vector<SplitAtom>> combos{{}};
  for (const auto& [slot, list] : by_slot) {
    std::vector<std::vector<SplitAtom>> next;
    for (const auto& combo : combos)
      for (const auto& a : list) {
        next.push_back(combo);
        next.back().push_back(a);
        if (next.size() >= 256) break;
      }
    combos = std::move(next);
  }
  std::vector<PatternConstraint> out;
  for (const auto& combo : combos)
    if (auto pc = assemble_constraint(combo, c)) out.push_back(std::move(*pc));
  return out;
}

CandidateOutcome mine(const PatternTransitionLog& log, const TreeParams& tp, const ExtractionParams& ep) {
  CandidateOutcome out;
  out.candidate = log.candidate;
  out.rows = log.rows.size();
  out.n_true = log.count(true);
  out.n_false = log.count(false);
  if (out.rows < ep.tau_s) {
    out.status = "skipped: " + std::to_string(out.rows) + " rows, fewer than tau_s";
    return out;
  }
  if (out.n_true == 0 || out.n_false == 0) {
    out.status = std::string("skipped: single class (only ") + (out.n_true ? "True" : "False") + " rows)";
    return out;
  }
  out.tree = fit(log, tp);
  out.false_leaves = select_false_leaves(*out.tree, ep);
  auto atoms = collect_violations(*out.tree, out.false_leaves, log.schema, log.candidate.kind);
  out.atoms = resolve_duplicates(atoms);
  auto pc = best_assembly(atoms, log);
  if (!pc) {
    out.status = out.false_leaves.empty() ? "no pattern: no confident False leaf" : "no pattern: template incomplete";
    return out;
  }
  out.atoms = pc->provenance;
  if (pc->coverage < ep.min_coverage) {
    out.status = "no pattern: admits only " + format_number(std::round(pc->coverage * 1000) / 10) +
                 "% of observed firings";
    return out;
  }
  out.constraint = std::move(pc);
  out.status = "constraint";
  return out;
}

}  // namespace

std::optional<PatternConstraint> best_assembly(const std::vector<SplitAtom>& atoms, const PatternTransitionLog& log) {
  auto pc = assemble_constraint(resolve_duplicates(atoms), log.candidate);
  if (!pc) return pc;
  score(*pc, log);
  if (pc->coverage < 1) {
    // A nested split on the same slot can be tighter than the one with the
    // largest impurity drop; take it when it admits more observed firings.
    for (auto& alt : alternatives(atoms, log.candidate)) {
      score(alt, log);
      if (alt.coverage > pc->coverage) pc = std::move(alt);
    }
  }
  return pc;
}

DiscoveryResult discover(const Log& log, const Net& net, const TreeParams& tree_params,
                         const ExtractionParams& extraction_params) {
  if (auto problems = validate_params(tree_params); !problems.empty()) throw ValidationError(problems.front());
  if (auto problems = validate_params(extraction_params); !problems.empty()) throw ValidationError(problems.front());
  require_valid(net);
  Net base = net.without_guards();
  auto replayed = replay(log, base);

  DiscoveryResult out;
  out.replay_report = replayed.report;
  for (const auto& c : detect_constructs(base)) {
    out.pt_logs.push_back(build_pt_log(base, c, replayed.samples));
    out.outcomes.push_back(mine(out.pt_logs.back(), tree_params, extraction_params));
  }

  // one constraint per (t_g, kind): the one explaining most waiting states
  std::map<std::pair<std::string, PatternKind>, const PatternConstraint*> best;
  for (const auto& o : out.outcomes) {
    if (!o.constraint) continue;
    auto key = std::make_pair(o.candidate.t_g, o.candidate.kind);
    auto it = best.find(key);
    if (it == best.end() || o.constraint->support > it->second->support) best[key] = &*o.constraint;
  }
  for (const auto& [key, pc] : best) out.constraints.push_back(*pc);
  for (auto& o : out.outcomes)
    if (o.constraint && best.at({o.candidate.t_g, o.candidate.kind}) != &*o.constraint)
      o.status = "superseded by a candidate with larger support";

  auto annotated = annotate_net(base, out.constraints);
  out.replayability = replay(log, annotated, ReplayOptions{true}).report;
  return out;
}

Net annotate_net(const Net& net, const std::vector<PatternConstraint>& constraints) {
  std::map<std::string, Constraint> guards;
  for (const auto& pc : constraints) {
    if (!net.find_transition(pc.candidate.t_g))
      throw ValidationError("constraint targets unknown transition '" + pc.candidate.t_g + "'");
    auto& g = guards[pc.candidate.t_g];
    g = g && pc.expr;
  }
  Net out = net;
  for (const auto& [t, g] : guards) out = out.with_guard(t, g);
  require_valid(out);
  return out;
}

}  // namespace dsync
