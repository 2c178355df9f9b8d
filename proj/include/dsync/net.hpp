#pragma once

// Simplified timed colored Petri nets: places with colorsets, transitions with
// delays and optional guards, flows, and an initial marking.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dsync/constraint.hpp"
#include "dsync/marking.hpp"

namespace dsync {

/// Seeded pseudo-random stream. Streams are keyed by (seed, name) so that each
/// transition draws from its own independent sequence.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view key);
  /// Uniform in [0, 1).
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

struct DelaySpec {
  enum class Kind { Constant, Uniform, Exponential };
  Kind kind = Kind::Constant;
  double a = 0;  // constant value, uniform lo, or exponential mean
  double b = 0;  // uniform hi

  static DelaySpec constant(double v) { return {Kind::Constant, v, 0}; }
  static DelaySpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static DelaySpec exponential(double mean) { return {Kind::Exponential, mean, 0}; }

  bool is_constant() const { return kind == Kind::Constant; }
  double sample(RandomStream& rng) const;
  std::optional<std::string> problem() const;

  friend bool operator==(const DelaySpec&, const DelaySpec&) = default;
};

/// Generator for case attributes injected by source transitions.
struct AttrGenerator {
  enum class Kind { Constant, Uniform, UniformInt, Bernoulli, Choice };
  Kind kind = Kind::Constant;
  double lo = 0, hi = 0;      // Uniform / UniformInt bounds, Bernoulli p in `lo`
  std::vector<Value> values;  // Constant (one value) / Choice

  Value sample(RandomStream& rng) const;
  AttrType type() const;

  friend bool operator==(const AttrGenerator&, const AttrGenerator&) = default;
};

struct ArrivalSpec {
  DelaySpec interarrival;
  std::vector<std::pair<std::string, AttrGenerator>> attributes;
  std::size_t max_count = 1000;
  Time first_at = 0;
  std::string case_prefix;

  friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;
};

/// Value-aware binding choice for one transition; FIFO breaks ties.
struct Selection {
  std::string attr;
  bool maximize = true;

  friend bool operator==(const Selection&, const Selection&) = default;
};

enum class PlaceKind { Case, Resource, Plain };
std::string_view to_string(PlaceKind kind);
PlaceKind parse_place_kind(std::string_view text);

struct Attribute {
  std::string name;
  AttrType type = AttrType::Number;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Place {
  std::string id;
  PlaceKind kind = PlaceKind::Plain;
  std::vector<Attribute> attributes;

  const Attribute* attribute(std::string_view name) const;

  friend bool operator==(const Place&, const Place&) = default;
};

struct Transition {
  std::string id;
  bool is_task = true;
  DelaySpec delay;
  std::optional<Constraint> guard;
  std::optional<ArrivalSpec> arrival;
  std::optional<Selection> select;
  /// A batch transition consumes every time-enabled token of its single case
  /// input place in one firing; the guard is checked once per batch.
  bool batch = false;
  /// Case input place whose token identifies the case of a firing. Empty means
  /// the first case input place in flow declaration order.
  std::string case_source;

  bool is_source() const { return arrival.has_value(); }

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Flow {
  std::string source;
  std::string target;

  friend bool operator==(const Flow&, const Flow&) = default;
};

class Net {
 public:
  Net() = default;
  Net(std::string name, std::vector<Place> places, std::vector<Transition> transitions,
      std::vector<Flow> flows, Marking initial_marking);

  const std::string& name() const { return name_; }
  const std::vector<Place>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<Flow>& flows() const { return flows_; }
  const Marking& initial_marking() const { return initial_; }

  const Place* find_place(std::string_view id) const;
  const Transition* find_transition(std::string_view id) const;
  const Place& place(std::string_view id) const;
  const Transition& transition(std::string_view id) const;
  bool has_node(std::string_view id) const;

  /// Incoming / outgoing node ids, sorted.
  const std::vector<std::string>& preset(std::string_view node) const;
  const std::vector<std::string>& postset(std::string_view node) const;
  bool has_flow(std::string_view source, std::string_view target) const;

  /// Resolved case-source place of a transition, or empty if it has no case input.
  const std::string& case_source(std::string_view transition) const;

  /// Copy with the guard of `transition` replaced.
  Net with_guard(std::string_view transition, std::optional<Constraint> guard) const;
  /// Copy with every guard removed.
  Net without_guards() const;

  friend bool operator==(const Net& a, const Net& b) {
    return a.name_ == b.name_ && a.places_ == b.places_ && a.transitions_ == b.transitions_ &&
           a.flows_ == b.flows_ && a.initial_ == b.initial_;
  }

 private:
  void index();

  std::string name_;
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::vector<Flow> flows_;
  Marking initial_;

  std::map<std::string, std::size_t, std::less<>> place_index_;
  std::map<std::string, std::size_t, std::less<>> transition_index_;
  std::map<std::string, std::vector<std::string>, std::less<>> preset_, postset_;
  std::map<std::string, std::string, std::less<>> case_source_;
};

/// All structural and typing problems of a net; empty iff the net is valid.
std::vector<std::string> validate_net(const Net& net);
/// Throws ValidationError listing every violation.
void require_valid(const Net& net);

/// Bindings of `transition` over time-enabled tokens (available_at <= now),
/// ordered by place id, then token availability, then case id. When
/// `check_guard` is set and the transition is guarded, the guard must hold.
std::vector<Binding> enabled_bindings(const Net& net, const Marking& m, std::string_view transition,
                                      Time now, bool check_guard = true);
bool is_enabled(const Net& net, const Marking& m, std::string_view transition, Time now,
                bool check_guard = true);

/// Fires `transition` with binding `y` at `now`. Produced tokens become
/// available at `now + delay`. Pure: the input marking is not modified.
Marking fire(const Net& net, const Marking& m, std::string_view transition, const Binding& y,
             Time now, Time delay);
/// As above, sampling the delay from the transition's delay distribution.
Marking fire(const Net& net, const Marking& m, std::string_view transition, const Binding& y,
             Time now, RandomStream& rng);

/// Puts a new case token into every case output place of a source transition.
Marking emit_case(const Net& net, const Marking& m, std::string_view source, const Token& case_token);

/// Guards currently attached to the net, in transition order.
std::vector<std::pair<std::string, Constraint>> ground_truth(const Net& net);

bool is_case_place(const Net& net, std::string_view place);

}  // namespace dsync
