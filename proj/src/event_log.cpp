#include "dsync/event_log.hpp"

#include <algorithm>
#include <cctype>

#include "dsync/model_io.hpp"

namespace dsync {

bool event_less(const Event& a, const Event& b) {
  if (a.complete != b.complete) return a.complete < b.complete;
  if (a.start != b.start) return a.start < b.start;
  if (a.case_id != b.case_id) return a.case_id < b.case_id;
  return a.label < b.label;
}

Log make_log(std::vector<Event> events, std::vector<Attribute> schema) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.label.empty()) throw ValidationError("event " + std::to_string(i) + " has an empty label");
    if (e.start > e.complete)
      throw ValidationError("event " + std::to_string(i) + " (case " + e.case_id + ", " + e.label +
                            ") starts after it completes");
  }
  std::stable_sort(events.begin(), events.end(), event_less);
  return Log{std::move(events), std::move(schema)};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

std::vector<CsvRow> read_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string cell;
  bool quoted = false, cell_started = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_row = [&] {
    row.cells.push_back(std::move(cell));
    cell.clear();
    bool blank = row.cells.size() == 1 && row.cells[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row = CsvRow{};
    row.line = line;
    cell_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!cell_started) quoted = true;
        else cell += c;
        cell_started = true;
        break;
      case ',':
        row.cells.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_row();
        break;
      default:
        cell += c;
        cell_started = true;
    }
  }
  if (quoted) throw ValidationError("log: unterminated quoted field");
  if (!cell.empty() || !row.cells.empty()) end_row();
  return rows;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len, bool& ok) {
  if (pos + len > s.size()) {
    ok = false;
    return 0;
  }
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      ok = false;
      return 0;
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

// days since 1970-01-01 of a proleptic Gregorian date
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

}  // namespace

std::optional<double> parse_iso_minutes(std::string_view s) {
  bool ok = true;
  int year = parse_fixed(s, 0, 4, ok);
  if (!ok || s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
    return std::nullopt;
  int month = parse_fixed(s, 5, 2, ok), day = parse_fixed(s, 8, 2, ok);
  int hour = parse_fixed(s, 11, 2, ok), minute = parse_fixed(s, 14, 2, ok);
  if (!ok || month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59) return std::nullopt;
  double seconds = 0;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    auto end = pos + 1;
    while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) ++end;
    auto sec = parse_number(s.substr(pos + 1, end - pos - 1));
    if (!sec || *sec < 0 || *sec >= 61) return std::nullopt;
    seconds = *sec;
    pos = end;
  }
  double offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      // UTC
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() - pos == 6 && s[pos + 3] == ':') {
      int oh = parse_fixed(s, pos + 1, 2, ok), om = parse_fixed(s, pos + 4, 2, ok);
      if (!ok) return std::nullopt;
      offset_minutes = (s[pos] == '+' ? 1 : -1) * (oh * 60.0 + om);
    } else {
      return std::nullopt;
    }
  }
  double days = static_cast<double>(days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)));
  return days * 1440.0 + hour * 60.0 + minute + seconds / 60.0 - offset_minutes;
}

Log parse_log(std::string_view text, const CsvOptions& opts) {
  auto rows = read_csv(text);
  if (rows.empty()) throw ValidationError("log: missing header row");
  std::vector<std::string> header;
  for (const auto& h : rows[0].cells) header.push_back(trim(h));

  auto column = [&](const char* name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  std::size_t c_case = 0, c_act = 0, c_start = 0, c_complete = 0;
  for (auto [name, slot] : {std::pair{"case", &c_case}, std::pair{"activity", &c_act},
                            std::pair{"start", &c_start}, std::pair{"complete", &c_complete}}) {
    auto idx = column(name);
    if (!idx) throw ValidationError(std::string("log: missing mandatory column '") + name + "'");
    *slot = *idx;
  }
  auto c_resource = column("resource");

  std::vector<std::size_t> attr_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == c_case || i == c_act || i == c_start || i == c_complete || (c_resource && i == *c_resource)) continue;
    if (header[i].empty()) throw ValidationError("log: empty column name at position " + std::to_string(i + 1));
    attr_cols.push_back(i);
  }

  // infer one type per attribute column
  std::vector<Attribute> schema;
  for (auto col : attr_cols) {
    bool all_num = true, all_bool = true, any = false;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& cells = rows[r].cells;
      if (col >= cells.size()) continue;
      auto v = trim(cells[col]);
      if (v.empty()) continue;
      any = true;
      if (!parse_number(v)) all_num = false;
      if (!parse_bool(v)) all_bool = false;
    }
    AttrType type = AttrType::Text;
    if (any && all_num) type = AttrType::Number;
    else if (any && all_bool) type = AttrType::Boolean;
    schema.push_back({header[col], type});
  }

  std::vector<Event> events;
  events.reserve(rows.size() - 1);
  std::vector<std::pair<double, double>> raw_times;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string where = "log line " + std::to_string(row.line);
    if (row.cells.size() > header.size())
      throw ValidationError(where + ": more cells than header columns");
    auto cell = [&](std::size_t i) { return i < row.cells.size() ? trim(row.cells[i]) : std::string(); };
    Event e;
    e.case_id = cell(c_case);
    e.label = cell(c_act);
    if (e.case_id.empty()) throw ValidationError(where + ": empty case id");
    if (e.label.empty()) throw ValidationError(where + ": empty activity");
    auto time_of = [&](std::size_t i, const char* name) {
      auto text = cell(i);
      auto v = opts.iso_time ? parse_iso_minutes(text) : parse_number(text);
      if (!v) throw ValidationError(where + ": " + name + " '" + text + "' is not a valid timestamp");
      return *v;
    };
    e.start = time_of(c_start, "start");
    e.complete = time_of(c_complete, "complete");
    if (e.start > e.complete) throw ValidationError(where + ": start is after complete");
    if (c_resource) {
      auto res = cell(*c_resource);
      if (!res.empty()) e.resource = res;
    }
    for (std::size_t k = 0; k < attr_cols.size(); ++k) {
      auto v = cell(attr_cols[k]);
      if (v.empty()) continue;
      switch (schema[k].type) {
        case AttrType::Number: e.attrs.emplace(schema[k].name, *parse_number(v)); break;
        case AttrType::Boolean: e.attrs.emplace(schema[k].name, *parse_bool(v)); break;
        case AttrType::Text: e.attrs.emplace(schema[k].name, v); break;
      }
    }
    events.push_back(std::move(e));
  }

  if (opts.iso_time && !events.empty()) {
    double origin = events.front().start;
    for (const auto& e : events) origin = std::min(origin, e.start);
    for (auto& e : events) {
      e.start -= origin;
      e.complete -= origin;
    }
  }
  return make_log(std::move(events), std::move(schema));
}

std::string write_log(const Log& log) {
  bool has_resource = std::any_of(log.events.begin(), log.events.end(),
                                  [](const Event& e) { return e.resource.has_value(); });
  std::string out = "case,activity,start,complete";
  if (has_resource) out += ",resource";
  for (const auto& a : log.schema) out += "," + csv_escape(a.name);
  out += "\n";
  for (const auto& e : log.events) {
    out += csv_escape(e.case_id) + "," + csv_escape(e.label) + "," + format_number(e.start) + "," +
           format_number(e.complete);
    if (has_resource) out += "," + csv_escape(e.resource.value_or(""));
    for (const auto& a : log.schema) {
      out += ",";
      auto it = e.attrs.find(a.name);
      if (it != e.attrs.end()) out += csv_escape(format_value(it->second));
    }
    out += "\n";
  }
  return out;
}

Log load_log(const std::string& path, const CsvOptions& opts) {
  auto text = read_text_file(path);
  try {
    return parse_log(text, opts);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::map<std::string, std::vector<Event>> traces(const Log& log) {
  std::map<std::string, std::vector<Event>> out;
  for (const auto& e : log.events) out[e.case_id].push_back(e);
  return out;
}

}  // namespace dsync
