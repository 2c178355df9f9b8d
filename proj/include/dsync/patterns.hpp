#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsync/net.hpp"
#include "dsync/replay.hpp"

namespace dsync {

enum class PatternKind { Priority, Blocking, HoldBatch, Choice };
std::string_view to_string(PatternKind kind);
PatternKind parse_pattern_kind(std::string_view text);

/// One place in the net where a pattern could act. Roles by kind:
///   priority  : queue (input of t_g), upstream (input of the transition feeding the queue)
///   blocking  : downstream (output of t_g)
///   holdbatch : input (input of t_g)
///   choice    : shared (input of t_g and of a competing transition), other_input
///               (input of the competitor only)
struct PatternCandidate {
  PatternKind kind = PatternKind::Blocking;
  std::string t_g;
  std::map<std::string, std::string> roles;
  std::string attr;  // priority only

  const std::string& role(const std::string& name) const { return roles.at(name); }
  /// Stable identifier, also used for file names, e.g. `blocking@pre-processing[downstream=q1]`.
  std::string id() const;

  friend bool operator==(const PatternCandidate&, const PatternCandidate&) = default;
};

bool candidate_less(const PatternCandidate& a, const PatternCandidate& b);

std::vector<PatternCandidate> detect_constructs(const Net& net);
std::vector<FeatureRef> features_for(const PatternCandidate& c);

struct PtRow {
  Time time = 0;
  std::vector<double> values;  // booleans as 0/1
  bool label = false;
};

struct PatternTransitionLog {
  PatternCandidate candidate;
  std::vector<FeatureRef> schema;
  std::vector<PtRow> rows;

  std::size_t count(bool label) const;
};

/// One row with label true per instant in which t_g started, evaluated on the
/// marking t_g decided on; one row with label false per instant after which t_g
/// was still enabled (guards ignored) but did not fire again. Repaired instants
/// are skipped.
PatternTransitionLog build_pt_log(const Net& net, const PatternCandidate& c, const std::vector<StateSample>& samples);

/// Columns: time, one per feature (canonical feature text), label.
std::string pt_log_csv(const PatternTransitionLog& log);

}  // namespace dsync
