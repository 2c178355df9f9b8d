#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsync/decision_tree.hpp"
#include "dsync/event_log.hpp"
#include "dsync/patterns.hpp"
#include "dsync/replay.hpp"

namespace dsync {

struct ExtractionParams {
  std::size_t tau_s = 10;  // minimum samples of a False leaf
  double tau_g = 0.1;      // maximum Gini of a False leaf
  /// Share of the positive rows (t_g fired) that the permission constraint
  /// must admit. A constraint that would have blocked observed firings does
  /// not make the net replayable and is dropped.
  double min_coverage = 0.95;
};

std::vector<std::string> validate_params(const ExtractionParams& p);

/// One directed split condition on a root-to-leaf path.
struct SplitAtom {
  FeatureRef feature;
  CmpOp op = CmpOp::Gt;  // Gt / Le for numeric splits, Eq for boolean ones
  double threshold = 0;  // for boolean splits: 1 (== true) or 0 (== false)
  double delta_gini = 0;  // gini(child on the path) - gini(parent)
  int node = 0;           // id of the splitting (parent) node
  std::string slot;       // template slot the condition fills, empty if none

  std::string text() const;
  friend bool operator==(const SplitAtom&, const SplitAtom&) = default;
};

struct PatternConstraint {
  PatternCandidate candidate;
  Constraint expr;          // permission form: t_g may fire when it holds
  std::size_t support = 0;  // False rows the constraint explains
  double coverage = 1;      // share of True rows it admits
  std::vector<SplitAtom> provenance;
};

/// Leaves predicting False with samples >= tau_s and gini <= tau_g.
std::vector<int> select_false_leaves(const Tree& tree, const ExtractionParams& p);

/// Every directed condition on the path from the root to `leaf`.
std::vector<SplitAtom> path_conditions(const Tree& tree, int leaf, const std::vector<FeatureRef>& schema);

/// Conditions on the path that match the kind's violation template and lower
/// the Gini impurity.
std::vector<SplitAtom> trace_and_filter(const Tree& tree, int leaf, const std::vector<FeatureRef>& schema,
                                        PatternKind kind);

/// Template conditions over the paths of all given leaves, each split once.
std::vector<SplitAtom> collect_violations(const Tree& tree, const std::vector<int>& leaves,
                                          const std::vector<FeatureRef>& schema, PatternKind kind);

/// Keeps one atom per template slot: the one with the largest |delta_gini|.
std::vector<SplitAtom> resolve_duplicates(std::vector<SplitAtom> atoms);

/// Maps violation atoms to the permission constraint; empty when a slot the
/// kind requires is missing.
std::optional<PatternConstraint> assemble_constraint(const std::vector<SplitAtom>& atoms, const PatternCandidate& c);

/// Assembles the constraint from the atoms with the largest impurity drop per
/// slot and scores it on `log`. When it would block some observed firings,
/// every other per-slot combination of the atoms is tried and the one
/// admitting the most firings is kept. Empty when the template is incomplete.
std::optional<PatternConstraint> best_assembly(const std::vector<SplitAtom>& atoms, const PatternTransitionLog& log);

/// Evaluates a constraint over a pattern-transition row.
bool holds_on_row(const Constraint& c, const std::vector<FeatureRef>& schema, const std::vector<double>& row);

struct CandidateOutcome {
  PatternCandidate candidate;
  std::size_t rows = 0, n_true = 0, n_false = 0;
  std::optional<Tree> tree;
  std::vector<int> false_leaves;
  std::vector<SplitAtom> atoms;
  std::optional<PatternConstraint> constraint;
  std::string status;  // "constraint", "no pattern", or the reason it was skipped
};

struct DiscoveryResult {
  MatchReport replay_report;
  std::vector<PatternTransitionLog> pt_logs;  // parallel to outcomes
  std::vector<CandidateOutcome> outcomes;
  std::vector<PatternConstraint> constraints;  // sorted by (t_g, kind)
  /// Replay of the training log over the annotated net with guards on.
  MatchReport replayability;
};

DiscoveryResult discover(const Log& log, const Net& net, const TreeParams& tree_params,
                         const ExtractionParams& extraction_params);

/// Copy of the net whose guards are the conjunction of the constraints on each
/// transition; other transitions keep their guards.
Net annotate_net(const Net& net, const std::vector<PatternConstraint>& constraints);

}  // namespace dsync
