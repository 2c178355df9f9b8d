#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace dsync {

using Time = double;

/// Attribute payload carried by tokens and events.
using Value = std::variant<double, bool, std::string>;

enum class AttrType { Number, Boolean, Text };

std::string_view to_string(AttrType type);
AttrType parse_attr_type(std::string_view text);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double v);

std::string format_value(const Value& v);

/// Full-match numeric parse; rejects trailing garbage, empty text and inf/nan.
std::optional<double> parse_number(std::string_view text);
std::optional<bool> parse_bool(std::string_view text);

bool is_number(const Value& v);
bool is_bool(const Value& v);
double as_number(const Value& v);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input failed a structural or semantic check (model, log, config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsync
