#include "dsync/marking.hpp"

#include <algorithm>
#include <sstream>

namespace dsync {

bool token_less(const Token& a, const Token& b) {
  if (a.available_at != b.available_at) return a.available_at < b.available_at;
  if (a.case_id != b.case_id) return a.case_id < b.case_id;
  return a.attrs < b.attrs;
}

std::span<const Token> Marking::tokens(const std::string& place) const {
  auto it = places_.find(place);
  if (it == places_.end()) return {};
  return it->second;
}

void Marking::add(const std::string& place, Token token) {
  auto& bag = places_[place];
  auto pos = std::upper_bound(bag.begin(), bag.end(), token, token_less);
  bag.insert(pos, std::move(token));
}

bool Marking::remove(const std::string& place, const Token& token) {
  auto it = places_.find(place);
  if (it == places_.end()) return false;
  auto& bag = it->second;
  auto pos = std::find(bag.begin(), bag.end(), token);
  if (pos == bag.end()) return false;
  bag.erase(pos);
  if (bag.empty()) places_.erase(it);
  return true;
}

bool Marking::contains(const std::string& place, const Token& token) const {
  auto bag = tokens(place);
  return std::find(bag.begin(), bag.end(), token) != bag.end();
}

std::size_t Marking::count(const std::string& place) const { return tokens(place).size(); }

std::size_t Marking::count_enabled(const std::string& place, Time now) const {
  auto bag = tokens(place);
  // sorted by availability, so the enabled tokens form a prefix
  auto end = std::upper_bound(bag.begin(), bag.end(), now,
                              [](Time t, const Token& tok) { return t < tok.available_at; });
  return static_cast<std::size_t>(end - bag.begin());
}

std::size_t Marking::total() const {
  std::size_t n = 0;
  for (const auto& [_, bag] : places_) n += bag.size();
  return n;
}

std::string describe(const Token& token) {
  std::ostringstream out;
  out << '(' << token.case_id.value_or("-");
  for (const auto& [k, v] : token.attrs) out << ',' << k << '=' << format_value(v);
  out << ")@" << format_number(token.available_at);
  return out.str();
}

std::string describe(const Marking& marking) {
  std::ostringstream out;
  bool first_place = true;
  for (const auto& [place, bag] : marking.places()) {
    if (!first_place) out << "; ";
    first_place = false;
    out << place << " -> ";
    for (std::size_t i = 0; i < bag.size(); ++i) out << (i ? " " : "") << describe(bag[i]);
  }
  return out.str();
}

}  // namespace dsync
