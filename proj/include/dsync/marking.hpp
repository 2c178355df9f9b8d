#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsync/value.hpp"

namespace dsync {

/// A colored, timed token. Case tokens carry a case id and attributes;
/// resource tokens carry the resource id in `case_id` and no attributes.
struct Token {
  std::optional<std::string> case_id;
  std::map<std::string, Value> attrs;
  Time available_at = 0;

  bool enabled_at(Time now) const { return available_at <= now; }

  friend bool operator==(const Token&, const Token&) = default;
};

/// Canonical token order inside a place: availability first, then case id.
bool token_less(const Token& a, const Token& b);

/// Per-place multisets of tokens. Tokens inside a place are kept sorted by
/// `token_less`, so iteration order is reproducible.
class Marking {
 public:
  std::span<const Token> tokens(const std::string& place) const;

  void add(const std::string& place, Token token);
  /// Removes one token equal to `token`; returns false if none is present.
  bool remove(const std::string& place, const Token& token);
  bool contains(const std::string& place, const Token& token) const;

  std::size_t count(const std::string& place) const;
  std::size_t count_enabled(const std::string& place, Time now) const;
  std::size_t total() const;

  const std::map<std::string, std::vector<Token>>& places() const { return places_; }

  friend bool operator==(const Marking&, const Marking&) = default;

 private:
  std::map<std::string, std::vector<Token>> places_;
};

/// Choice of one token per input place of a transition.
using Binding = std::map<std::string, Token>;

std::string describe(const Token& token);
std::string describe(const Marking& marking);

}  // namespace dsync
