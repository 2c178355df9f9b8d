#include "dsync/patterns.hpp"

#include <algorithm>
#include <set>

namespace dsync {

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::Priority: return "priority";
    case PatternKind::Blocking: return "blocking";
    case PatternKind::HoldBatch: return "holdbatch";
    case PatternKind::Choice: return "choice";
  }
  return "?";
}

PatternKind parse_pattern_kind(std::string_view text) {
  for (auto k : {PatternKind::Priority, PatternKind::Blocking, PatternKind::HoldBatch, PatternKind::Choice})
    if (to_string(k) == text) return k;
  throw ValidationError("unknown pattern kind '" + std::string(text) + "'");
}

std::string PatternCandidate::id() const {
  std::string out = std::string(to_string(kind)) + "@" + t_g + "[";
  bool first = true;
  for (const auto& [r, p] : roles) {
    if (!first) out += ",";
    out += r + "=" + p;
    first = false;
  }
  if (!attr.empty()) out += ",attr=" + attr;
  return out + "]";
}

bool candidate_less(const PatternCandidate& a, const PatternCandidate& b) {
  return std::tie(a.t_g, a.kind, a.roles, a.attr) < std::tie(b.t_g, b.kind, b.roles, b.attr);
}

std::vector<PatternCandidate> detect_constructs(const Net& net) {
  auto is_case = [&](const std::string& p) { return net.place(p).kind == PlaceKind::Case; };
  std::vector<PatternCandidate> out;
  for (const auto& tg : net.transitions()) {
    if (tg.is_source()) continue;
    const auto& pre = net.preset(tg.id);
    for (const auto& pi : pre) {
      if (!is_case(pi)) continue;
      out.push_back({PatternKind::HoldBatch, tg.id, {{"input", pi}}, {}});
      // priority: the queue p_i is fed by t' which itself consumes from p_j
      for (const auto& tp : net.preset(pi)) {
        if (tp == tg.id) continue;
        for (const auto& pj : net.preset(tp)) {
          if (pj == pi || !is_case(pj)) continue;
          for (const auto& a : net.place(pi).attributes) {
            const auto* b = net.place(pj).attribute(a.name);
            if (a.type != AttrType::Number || !b || b->type != AttrType::Number) continue;
            out.push_back({PatternKind::Priority, tg.id, {{"queue", pi}, {"upstream", pj}}, a.name});
          }
        }
      }
      // choice: p_i (here the shared place) also feeds a competitor t'
      for (const auto& tp : net.postset(pi)) {
        if (tp == tg.id) continue;
        for (const auto& other : net.preset(tp)) {
          if (other == pi || !is_case(other) || std::binary_search(pre.begin(), pre.end(), other)) continue;
          out.push_back({PatternKind::Choice, tg.id, {{"shared", pi}, {"other_input", other}}, {}});
        }
      }
    }
    for (const auto& q : net.postset(tg.id))
      if (is_case(q)) out.push_back({PatternKind::Blocking, tg.id, {{"downstream", q}}, {}});
  }
  std::sort(out.begin(), out.end(), candidate_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<FeatureRef> features_for(const PatternCandidate& c) {
  switch (c.kind) {
    case PatternKind::Priority: {
      const auto& pi = c.role("queue");
      const auto& pj = c.role("upstream");
      std::vector<FeatureRef> out = {
          FeatureRef::attr_val(pj, c.attr, Agg::Max), FeatureRef::attr_val(pj, c.attr, Agg::Min),
          FeatureRef::attr_val(pi, c.attr, Agg::Max), FeatureRef::attr_val(pi, c.attr, Agg::Min)};
      for (auto kx : {Agg::Max, Agg::Min})
        for (auto ky : {Agg::Max, Agg::Min})
          out.push_back(FeatureRef::ratio(FeatureRef::attr_val(pj, c.attr, kx), FeatureRef::attr_val(pi, c.attr, ky)));
      out.push_back(FeatureRef::attr_enabled(pi, c.attr, Agg::Max));
      out.push_back(FeatureRef::attr_enabled(pi, c.attr, Agg::Min));
      return out;
    }
    case PatternKind::Blocking: return {FeatureRef::nr_tokens(c.role("downstream"))};
    case PatternKind::HoldBatch:
      return {FeatureRef::nr_tokens_enabled(c.role("input")), FeatureRef::time_until_next(c.role("input"))};
    case PatternKind::Choice: return {FeatureRef::time_until_next(c.role("other_input"))};
  }
  return {};
}

std::size_t PatternTransitionLog::count(bool label) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [&](const PtRow& r) { return r.label == label; }));
}

namespace {

void collect_places(const FeatureRef& f, std::vector<std::string>& out) {
  if (f.kind == FeatureKind::Ratio)
    for (const auto& o : f.operands) collect_places(o, out);
  else
    out.push_back(f.place);
}

}  // namespace

PatternTransitionLog build_pt_log(const Net& net, const PatternCandidate& c, const std::vector<StateSample>& samples) {
  PatternTransitionLog out{c, features_for(c), {}};
  if (!net.find_transition(c.t_g)) throw ValidationError("candidate transition '" + c.t_g + "' is not in the net");
  std::vector<std::string> places;
  for (const auto& f : out.schema) collect_places(f, places);
  for (const auto& p : places)
    if (!net.find_place(p)) throw ValidationError("feature place '" + p + "' is not in the net");

  auto row = [&](Time t, const Marking& m, bool label) {
    PtRow r{t, {}, label};
    r.values.reserve(out.schema.size());
    for (const auto& f : out.schema) r.values.push_back(eval_feature_number(f, m, t));
    out.rows.push_back(std::move(r));
  };
  for (const auto& s : samples) {
    if (s.flagged) continue;
    if (s.fired.count(c.t_g)) row(s.time, s.decision.at(c.t_g), true);
    if (is_enabled(net, s.settled, c.t_g, s.time, false)) row(s.time, s.settled, false);
  }
  return out;
}

std::string pt_log_csv(const PatternTransitionLog& log) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::string out = "time";
  for (const auto& f : log.schema) out += "," + quote(to_string(f));
  out += ",label\n";
  for (const auto& r : log.rows) {
    out += format_number(r.time);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      out += ",";
      out += log.schema[i].is_boolean() ? (r.values[i] != 0 ? "true" : "false") : format_number(r.values[i]);
    }
    out += r.label ? ",true\n" : ",false\n";
  }
  return out;
}

}  // namespace dsync
