#pragma once

#include <cstdint>
#include <limits>

#include "dsync/event_log.hpp"
#include "dsync/net.hpp"

namespace dsync {

enum class Policy { Fifo, Lifo };

struct SimConfig {
  std::uint64_t seed = 1;
  /// Stop after the instant in which this many cases have completed; 0 = no limit.
  /// A case is complete when all its tokens have left the case places or rest,
  /// available, in case places without outgoing flows.
  std::size_t max_cases = 500;
  Time horizon = std::numeric_limits<Time>::infinity();
  Policy policy = Policy::Fifo;
};

/// Problems with a configuration; empty when usable.
std::vector<std::string> validate_config(const SimConfig& cfg);

class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Runs the net as a discrete-event simulation and returns the task events.
///
/// Within one instant, due source transitions fire first, then unguarded
/// transitions, and guarded transitions only when nothing unguarded can fire.
/// A guarded transition therefore decides on the marking that results from
/// every other move of that instant. Source transitions look one arrival ahead:
/// the k-th firing happens when case k-1 becomes available and creates case k
/// with its future arrival time, so the next arrival is visible to guards.
/// When the run stops early (max_cases or horizon), source events of cases that
/// would arrive after the stop time are left out of the log.
Log simulate(const Net& net, const SimConfig& cfg);

}  // namespace dsync
