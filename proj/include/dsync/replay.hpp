#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dsync/event_log.hpp"
#include "dsync/net.hpp"

namespace dsync {

/// State of the replayed net at one distinct event start time.
struct StateSample {
  Time time = 0;
  /// Before any move at `time`.
  Marking marking;
  /// After every move at `time`.
  Marking settled;
  /// Per transition started at `time`: the marking after all other moves of
  /// that instant but before its own first move.
  std::map<std::string, Marking> decision;
  std::set<std::string> fired;
  /// Some event at this instant had to be repaired.
  bool flagged = false;
};

struct UnmatchedEvent {
  Event event;
  std::string reason;  // "no binding" or "guard"
};

struct MatchReport {
  std::size_t matched = 0;
  std::vector<UnmatchedEvent> unmatched;
  /// Case tokens injected for source transitions that leave no events.
  std::size_t inferred_arrivals = 0;
  /// Matched moves whose bound tokens all became available exactly at the start.
  std::size_t exact_time_matches = 0;
  double mean_time_gap = 0;

  std::size_t total() const { return matched + unmatched.size(); }
  double match_rate() const { return total() == 0 ? 1.0 : static_cast<double>(matched) / total(); }
};

struct ReplayOptions {
  /// Evaluate guards when matching log moves (replayability check).
  bool check_guards = false;
};

struct ReplayResult {
  std::vector<StateSample> samples;
  MatchReport report;
};

/// Lexicographic similarity of a binding to an event; higher is better.
struct SimScore {
  bool case_match = false;
  int resource_match = 0;  // +1 same resource, 0 not comparable, -1 different
  int not_after_start = 0;  // bound tokens available no later than the start
  double time_gap = 0;      // minus the summed |available_at - start|
  double attr_gap = 0;      // minus the summed attribute distance

  auto key() const { return std::tie(case_match, resource_match, not_after_start, time_gap, attr_gap); }
  friend bool operator<(const SimScore& a, const SimScore& b) { return a.key() < b.key(); }
  friend bool operator==(const SimScore& a, const SimScore& b) { return a.key() == b.key(); }
};

SimScore sim_score(const Net& net, std::string_view transition, const Binding& y, const Event& e);

/// Replays the log over the net with log moves. Source transitions that
/// produce no events are reconstructed from the first event of each case.
ReplayResult replay(const Log& log, const Net& net, const ReplayOptions& opts = {});

}  // namespace dsync
