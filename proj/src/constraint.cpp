#include "dsync/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace dsync {

FeatureRef FeatureRef::attr_val(std::string place, std::string attr, Agg agg) {
  return {FeatureKind::AttrVal, std::move(place), std::move(attr), agg, {}};
}
FeatureRef FeatureRef::attr_enabled(std::string place, std::string attr, Agg agg) {
  return {FeatureKind::AttrEnabled, std::move(place), std::move(attr), agg, {}};
}
FeatureRef FeatureRef::nr_tokens(std::string place) {
  return {FeatureKind::NrTokens, std::move(place), {}, Agg::Max, {}};
}
FeatureRef FeatureRef::nr_tokens_enabled(std::string place) {
  return {FeatureKind::NrTokensEnabled, std::move(place), {}, Agg::Max, {}};
}
FeatureRef FeatureRef::time_until_next(std::string place) {
  return {FeatureKind::TimeUntilNext, std::move(place), {}, Agg::Max, {}};
}
FeatureRef FeatureRef::ratio(FeatureRef numerator, FeatureRef denominator) {
  FeatureRef f;
  f.kind = FeatureKind::Ratio;
  f.operands = {std::move(numerator), std::move(denominator)};
  return f;
}

Constraint Constraint::operator&&(const Constraint& other) const {
  Constraint out = *this;
  out.atoms.insert(out.atoms.end(), other.atoms.begin(), other.atoms.end());
  return out;
}

ParseError::ParseError(const std::string& message, std::size_t offset)
    : ValidationError(message + " at offset " + std::to_string(offset)), offset_(offset) {}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Constraint constraint() {
    Constraint c;
    skip_ws();
    if (at_end()) throw ParseError("empty constraint", pos_);
    auto save = pos_;
    if (lower(ident()) == "true") {
      skip_ws();
      if (at_end()) return c;
    }
    pos_ = save;
    c.atoms.push_back(atom());
    while (true) {
      skip_ws();
      if (at_end()) break;
      auto kw_pos = pos_;
      if (lower(ident()) != "and") throw ParseError("expected 'and'", kw_pos);
      c.atoms.push_back(atom());
    }
    return c;
  }

  FeatureRef feature_only() {
    auto f = feature();
    skip_ws();
    if (!at_end()) throw ParseError("unexpected trailing input", pos_);
    return f;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view ident() {
    skip_ws();
    auto start = pos_;
    while (!at_end() && is_ident_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || text_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string name(const char* what) {
    skip_ws();
    auto start = pos_;
    auto id = ident();
    if (id.empty()) throw ParseError(std::string("expected ") + what, start);
    return std::string(id);
  }

  Agg agg() {
    skip_ws();
    auto start = pos_;
    auto id = lower(ident());
    if (id == "max" || id == "argmax") return Agg::Max;
    if (id == "min" || id == "argmin") return Agg::Min;
    throw ParseError("expected 'max' or 'min'", start);
  }

  FeatureRef feature() {
    skip_ws();
    auto start = pos_;
    auto kind = lower(ident());
    if (kind.empty()) throw ParseError("expected feature", start);
    expect('(');
    FeatureRef f;
    if (kind == "ratio") {
      auto num = feature();
      expect(',');
      auto den = feature();
      expect(')');
      for (const auto* op : {&num, &den}) {
        if (op->kind != FeatureKind::AttrVal)
          throw ParseError("ratio operands must be attrval features", start);
      }
      return FeatureRef::ratio(std::move(num), std::move(den));
    }
    if (kind == "attrval" || kind == "attrenabled") {
      auto place = name("place id");
      expect(',');
      auto attr = name("attribute name");
      Agg a = Agg::Max;
      if (accept(',')) a = agg();
      expect(')');
      return kind == "attrval" ? FeatureRef::attr_val(place, attr, a)
                               : FeatureRef::attr_enabled(place, attr, a);
    }
    if (kind == "nrtokens" || kind == "nrtokensenabled" || kind == "timeuntilnext") {
      auto place = name("place id");
      expect(')');
      if (kind == "nrtokens") return FeatureRef::nr_tokens(place);
      if (kind == "nrtokensenabled") return FeatureRef::nr_tokens_enabled(place);
      return FeatureRef::time_until_next(place);
    }
    throw ParseError("unknown feature '" + kind + "'", start);
  }

  CmpOp op() {
    skip_ws();
    auto start = pos_;
    auto rest = text_.substr(pos_);
    auto take = [&](std::size_t n, CmpOp o) {
      pos_ += n;
      return o;
    };
    if (rest.starts_with("<=")) return take(2, CmpOp::Le);
    if (rest.starts_with(">=")) return take(2, CmpOp::Ge);
    if (rest.starts_with("==")) return take(2, CmpOp::Eq);
    if (rest.starts_with("<")) return take(1, CmpOp::Lt);
    if (rest.starts_with(">")) return take(1, CmpOp::Gt);
    throw ParseError("expected comparison operator", start);
  }

  Value constant() {
    skip_ws();
    auto start = pos_;
    while (!at_end() && (is_ident_char(text_[pos_]) || text_[pos_] == '+')) ++pos_;
    auto tok = text_.substr(start, pos_ - start);
    if (tok.empty()) throw ParseError("expected constant", start);
    if (auto b = parse_bool(lower(tok))) return *b;
    if (auto d = parse_number(tok)) return *d;
    throw ParseError("invalid constant '" + std::string(tok) + "'", start);
  }

  Atom atom() {
    skip_ws();
    auto start = pos_;
    Atom a;
    a.feature = feature();
    a.op = op();
    a.constant = constant();
    if (a.feature.is_boolean()) {
      if (!is_bool(a.constant) || a.op != CmpOp::Eq)
        throw ParseError("boolean feature must be compared with == true/false", start);
    } else if (is_bool(a.constant)) {
      throw ParseError("numeric feature compared with a boolean", start);
    }
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Constraint parse_constraint(std::string_view text) { return Parser(text).constraint(); }
FeatureRef parse_feature(std::string_view text) { return Parser(text).feature_only(); }

// ---------------------------------------------------------------------------
// Printing

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
    case CmpOp::Eq: return "==";
  }
  return "?";
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::AttrVal: return "attrval";
    case FeatureKind::AttrEnabled: return "attrenabled";
    case FeatureKind::NrTokens: return "nrtokens";
    case FeatureKind::NrTokensEnabled: return "nrtokensenabled";
    case FeatureKind::TimeUntilNext: return "timeuntilnext";
    case FeatureKind::Ratio: return "ratio";
  }
  return "?";
}

std::string to_string(const FeatureRef& f) {
  std::string out(to_string(f.kind));
  out += '(';
  switch (f.kind) {
    case FeatureKind::Ratio:
      out += to_string(f.operands.at(0)) + "," + to_string(f.operands.at(1));
      break;
    case FeatureKind::AttrVal:
    case FeatureKind::AttrEnabled:
      out += f.place + "," + f.attr + "," + (f.agg == Agg::Max ? "max" : "min");
      break;
    default:
      out += f.place;
  }
  out += ')';
  return out;
}

std::string to_string(const Atom& a) {
  return to_string(a.feature) + " " + std::string(to_string(a.op)) + " " + format_value(a.constant);
}

std::string to_string(const Constraint& c) {
  if (c.atoms.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < c.atoms.size(); ++i) {
    if (i) out += " and ";
    out += to_string(c.atoms[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Extremum {
  bool found = false;
  double value = 0;
  bool enabled = false;  // some token attaining the extremum is time-enabled
};

Extremum extremum(const FeatureRef& f, const Marking& m, Time now) {
  Extremum ex;
  for (const auto& tok : m.tokens(f.place)) {
    auto it = tok.attrs.find(f.attr);
    if (it == tok.attrs.end() || std::holds_alternative<std::string>(it->second)) continue;
    double v = as_number(it->second);
    bool better = !ex.found || (f.agg == Agg::Max ? v > ex.value : v < ex.value);
    if (better) {
      ex = {true, v, tok.enabled_at(now)};
    } else if (v == ex.value && tok.enabled_at(now)) {
      ex.enabled = true;
    }
  }
  return ex;
}

}  // namespace

Value eval_feature(const FeatureRef& f, const Marking& m, Time now) {
  switch (f.kind) {
    case FeatureKind::AttrVal:
      return extremum(f, m, now).value;
    case FeatureKind::AttrEnabled:
      return extremum(f, m, now).enabled;
    case FeatureKind::NrTokens:
      return static_cast<double>(m.count(f.place));
    case FeatureKind::NrTokensEnabled:
      return static_cast<double>(m.count_enabled(f.place, now));
    case FeatureKind::TimeUntilNext: {
      double best = kNoPendingToken;
      for (const auto& tok : m.tokens(f.place)) {
        if (tok.available_at > now) {
          best = tok.available_at - now;  // tokens are sorted by availability
          break;
        }
      }
      return best;
    }
    case FeatureKind::Ratio: {
      double num = eval_feature_number(f.operands.at(0), m, now);
      double den = eval_feature_number(f.operands.at(1), m, now);
      return num / std::max(den, kRatioEpsilon);
    }
  }
  return 0.0;
}

double eval_feature_number(const FeatureRef& f, const Marking& m, Time now) {
  return as_number(eval_feature(f, m, now));
}

bool compare(double lhs, CmpOp op, double rhs) {
  switch (op) {
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Ge: return lhs >= rhs;
    case CmpOp::Gt: return lhs > rhs;
    case CmpOp::Eq: return lhs == rhs;
  }
  return false;
}

bool eval_atom(const Atom& a, const Marking& m, Time now) {
  return compare(eval_feature_number(a.feature, m, now), a.op, as_number(a.constant));
}

bool eval_constraint(const Constraint& c, const Marking& m, Time now) {
  return std::all_of(c.atoms.begin(), c.atoms.end(),
                     [&](const Atom& a) { return eval_atom(a, m, now); });
}

}  // namespace dsync
