#pragma once

// Constraint language for synchronization guards.
//
//   expr    := atom ("and" atom)*
//   atom    := feature op const
//   feature := kind "(" place ["," attr] ["," agg] ")" | "ratio" "(" feature "," feature ")"
//   op      := "<=" | "<" | ">=" | ">" | "=="
//   const   := number | "true" | "false"
//
// Features are evaluated over a whole marking at a point in time, never over
// individual token identities.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dsync/marking.hpp"

namespace dsync {

enum class FeatureKind { AttrVal, AttrEnabled, NrTokens, NrTokensEnabled, TimeUntilNext, Ratio };
enum class Agg { Max, Min };
enum class CmpOp { Le, Lt, Ge, Gt, Eq };

/// Returned by TimeUntilNext when no token in the place is pending.
inline constexpr double kNoPendingToken = 1e9;
/// Lower bound applied to a Ratio denominator.
inline constexpr double kRatioEpsilon = 0.01;

struct FeatureRef {
  FeatureKind kind = FeatureKind::NrTokens;
  std::string place;
  std::string attr;         // AttrVal / AttrEnabled only
  Agg agg = Agg::Max;       // AttrVal / AttrEnabled only
  std::vector<FeatureRef> operands;  // Ratio only: numerator, denominator

  static FeatureRef attr_val(std::string place, std::string attr, Agg agg);
  static FeatureRef attr_enabled(std::string place, std::string attr, Agg agg);
  static FeatureRef nr_tokens(std::string place);
  static FeatureRef nr_tokens_enabled(std::string place);
  static FeatureRef time_until_next(std::string place);
  static FeatureRef ratio(FeatureRef numerator, FeatureRef denominator);

  bool is_boolean() const { return kind == FeatureKind::AttrEnabled; }

  friend bool operator==(const FeatureRef&, const FeatureRef&) = default;
};

struct Atom {
  FeatureRef feature;
  CmpOp op = CmpOp::Le;
  Value constant = 0.0;  // double, or bool for boolean features

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Conjunction of atoms; the empty conjunction is `true`.
struct Constraint {
  std::vector<Atom> atoms;

  bool empty() const { return atoms.empty(); }
  Constraint operator&&(const Constraint& other) const;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

Constraint parse_constraint(std::string_view text);
FeatureRef parse_feature(std::string_view text);

/// Canonical text, e.g. `attrval(q1,value,max)`; doubles as the column name
/// in pattern-transition logs.
std::string to_string(const FeatureRef& f);
std::string to_string(const Atom& a);
std::string to_string(const Constraint& c);
std::string_view to_string(CmpOp op);
std::string_view to_string(FeatureKind kind);

/// Evaluates a feature on a marking at `now`. Returns a double, or a bool for
/// AttrEnabled. AttrVal over an empty place is 0 and AttrEnabled is false.
Value eval_feature(const FeatureRef& f, const Marking& m, Time now);
/// Same as eval_feature but booleans map to 0/1.
double eval_feature_number(const FeatureRef& f, const Marking& m, Time now);
bool eval_atom(const Atom& a, const Marking& m, Time now);
bool eval_constraint(const Constraint& c, const Marking& m, Time now);

bool compare(double lhs, CmpOp op, double rhs);

}  // namespace dsync
