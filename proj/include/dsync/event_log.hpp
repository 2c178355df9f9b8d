#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsync/net.hpp"

namespace dsync {

struct Event {
  std::string case_id;
  std::string label;
  Time start = 0;
  Time complete = 0;
  std::optional<std::string> resource;
  std::map<std::string, Value> attrs;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Global event order: completion time, then start, case id and label.
bool event_less(const Event& a, const Event& b);

struct Log {
  std::vector<Event> events;
  std::vector<Attribute> schema;

  friend bool operator==(const Log&, const Log&) = default;
};

/// Sorts events into the global order and checks per-event invariants.
Log make_log(std::vector<Event> events, std::vector<Attribute> schema);

struct CsvOptions {
  /// Read start/complete as ISO-8601 date-times, converted to minutes since
  /// the earliest timestamp in the file.
  bool iso_time = false;
};

/// Mandatory columns: case, activity, start, complete. Optional: resource.
/// Every other column becomes an attribute whose type is inferred over the
/// whole column (number, then boolean, else text). Empty cells mean "absent".
Log parse_log(std::string_view text, const CsvOptions& opts = {});
std::string write_log(const Log& log);

Log load_log(const std::string& path, const CsvOptions& opts = {});

std::map<std::string, std::vector<Event>> traces(const Log& log);

/// Parses an ISO-8601 date-time (YYYY-MM-DD[T ]hh:mm[:ss[.fff]][Z|+hh:mm]) into
/// minutes since the Unix epoch.
std::optional<double> parse_iso_minutes(std::string_view text);

}  // namespace dsync
