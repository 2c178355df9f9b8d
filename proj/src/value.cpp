#include "dsync/value.hpp"

#include <charconv>
#include <cmath>

namespace dsync {

std::string_view to_string(AttrType type) {
  switch (type) {
    case AttrType::Number: return "number";
    case AttrType::Boolean: return "boolean";
    case AttrType::Text: return "text";
  }
  return "text";
}

AttrType parse_attr_type(std::string_view text) {
  if (text == "number") return AttrType::Number;
  if (text == "boolean") return AttrType::Boolean;
  if (text == "text") return AttrType::Text;
  throw ValidationError("unknown attribute type '" + std::string(text) + "'");
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_value(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<std::string>(v);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double out = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<bool> parse_bool(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  return std::nullopt;
}

bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }

double as_number(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  throw Error("value '" + std::get<std::string>(v) + "' is not numeric");
}

}  // namespace dsync
