#include "dsync/replay.hpp"

#include <algorithm>
#include <cmath>

namespace dsync {

SimScore sim_score(const Net& net, std::string_view transition, const Binding& y, const Event& e) {
  SimScore s;
  const auto& src = net.case_source(transition);
  if (src.empty()) {
    s.case_match = true;
  } else {
    auto it = y.find(src);
    s.case_match = it != y.end() && it->second.case_id == e.case_id;
  }
  bool saw_resource = false, resource_hit = false;
  for (const auto& [p, tok] : y) {
    auto kind = net.place(p).kind;
    if (kind == PlaceKind::Resource) {
      saw_resource = true;
      if (e.resource && tok.case_id == e.resource) resource_hit = true;
    }
    if (tok.available_at <= e.start) ++s.not_after_start;
    s.time_gap -= std::abs(tok.available_at - e.start);
    if (kind != PlaceKind::Case) continue;
    for (const auto& [name, v] : e.attrs) {
      auto it = tok.attrs.find(name);
      if (it == tok.attrs.end()) continue;
      if (is_number(v) && is_number(it->second)) s.attr_gap -= std::abs(as_number(v) - as_number(it->second));
      else if (v != it->second) s.attr_gap -= 1;
    }
  }
  if (saw_resource && e.resource) s.resource_match = resource_hit ? 1 : -1;
  return s;
}

namespace {

struct Injection {
  Time at = 0;
  std::string source;
  Token token;
};

// Rebuilds the case tokens of a source transition that is not in the log. A
// case belongs to the source when its first event consumes from one of the
// source's output places; case k is injected when case k-1 arrives (look-ahead),
// and arrives when its first event starts.
std::vector<Injection> infer_arrivals(const Log& log, const Net& net, const std::set<std::string>& labels) {
  struct FirstEvent {
    Time start;
    std::string case_id;
    const Event* event;
  };
  std::map<std::string, const Event*> first;
  for (const auto& e : log.events) {
    auto& f = first[e.case_id];
    if (!f || e.start < f->start) f = &e;
  }
  std::set<std::string> claimed;
  std::vector<Injection> out;
  for (const auto& s : net.transitions()) {
    if (!s.is_source() || labels.count(s.id)) continue;
    const auto& outputs = net.postset(s.id);
    std::vector<FirstEvent> cases;
    for (const auto& [case_id, e] : first) {
      if (claimed.count(case_id)) continue;
      const auto& pre = net.preset(e->label);
      bool feeds = std::any_of(outputs.begin(), outputs.end(),
                               [&](const std::string& p) { return std::binary_search(pre.begin(), pre.end(), p); });
      if (feeds) cases.push_back({e->start, case_id, e});
    }
    std::sort(cases.begin(), cases.end(), [](const FirstEvent& a, const FirstEvent& b) {
      return std::tie(a.start, a.case_id) < std::tie(b.start, b.case_id);
    });
    for (std::size_t k = 0; k < cases.size(); ++k) {
      claimed.insert(cases[k].case_id);
      Token tok;
      tok.case_id = cases[k].case_id;
      tok.attrs = cases[k].event->attrs;
      tok.available_at = cases[k].start;
      out.push_back({k == 0 ? cases[0].start : cases[k - 1].start, s.id, std::move(tok)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Injection& a, const Injection& b) { return a.at < b.at; });
  return out;
}

struct MoveStats {
  std::size_t matched = 0;
  std::size_t exact = 0;
  double gap_sum = 0;
};

class InstantReplay {
 public:
  InstantReplay(const Net& net, Time t, bool check_guards) : net_(net), t_(t), check_(check_guards) {}

  // Applies every event of the instant to `m`. Unmatched events are collected
  // (and repaired when `repair` is set).
  void run(Marking& m, const std::vector<const Event*>& events, bool repair, MoveStats* stats,
           std::vector<UnmatchedEvent>* unmatched) {
    std::vector<const Event*> sources, unguarded, guarded;
    for (const auto* e : events) {
      const auto& t = net_.transition(e->label);
      if (t.is_source()) sources.push_back(e);
      else if (check_ && t.guard) guarded.push_back(e);
      else unguarded.push_back(e);
    }
    for (const auto* e : sources) {
      Token tok;
      tok.case_id = e->case_id;
      tok.attrs = e->attrs;
      tok.available_at = e->complete;
      m = emit_case(net_, m, e->label, tok);
      if (stats) {
        ++stats->matched;
        ++stats->exact;
      }
    }
    std::vector<bool> done_u(unguarded.size()), done_g(guarded.size());
    std::set<std::string> batch_cleared;
    while (true) {
      sweep(m, unguarded, done_u, stats);
      bool progress = false;
      for (std::size_t i = 0; i < guarded.size() && !progress; ++i) {
        if (done_g[i]) continue;
        const auto& t = net_.transition(guarded[i]->label);
        if (!(t.batch && batch_cleared.count(t.id))) {
          if (!eval_constraint(*t.guard, m, t_)) continue;
          if (t.batch) batch_cleared.insert(t.id);
        }
        if (try_move(m, *guarded[i], stats)) done_g[i] = progress = true;
      }
      if (!progress) break;
    }
    auto leftover = [&](const std::vector<const Event*>& list, const std::vector<bool>& done) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (done[i]) continue;
        const auto& e = *list[i];
        const auto& t = net_.transition(e.label);
        bool blocked_by_guard = check_ && t.guard && best_binding(m, e).has_value();
        if (unmatched) unmatched->push_back({e, blocked_by_guard ? "guard" : "no binding"});
        if (repair) force(m, e);
      }
    };
    leftover(unguarded, done_u);
    leftover(guarded, done_g);
  }

 private:
  void sweep(Marking& m, const std::vector<const Event*>& list, std::vector<bool>& done, MoveStats* stats) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < list.size(); ++i)
        if (!done[i] && try_move(m, *list[i], stats)) done[i] = progress = true;
    }
  }

  std::optional<Binding> best_binding(const Marking& m, const Event& e) const {
    std::optional<Binding> best;
    SimScore best_score;
    for (auto& y : enabled_bindings(net_, m, e.label, t_, false)) {
      auto s = sim_score(net_, e.label, y, e);
      if (!s.case_match) continue;
      if (!best || best_score < s) {
        best_score = s;
        best = std::move(y);
      }
    }
    return best;
  }

  bool try_move(Marking& m, const Event& e, MoveStats* stats) {
    auto y = best_binding(m, e);
    if (!y) return false;
    apply(m, e, *y, stats);
    return true;
  }

  void apply(Marking& m, const Event& e, const Binding& y, MoveStats* stats) {
    if (stats) {
      ++stats->matched;
      double gap = 0;
      for (const auto& [p, tok] : y) gap += std::abs(tok.available_at - t_);
      stats->gap_sum += gap;
      if (gap == 0) ++stats->exact;
    }
    m = fire(net_, m, e.label, y, t_, e.complete - t_);
  }

  // Injects whatever tokens the event needs, then fires it without guard.
  void force(Marking& m, const Event& e) {
    const auto& src = net_.case_source(e.label);
    for (const auto& p : net_.preset(e.label)) {
      const auto& place = net_.place(p);
      auto fits = [&](const Token& tok) {
        if (!tok.enabled_at(t_)) return false;
        if (p == src) return tok.case_id == e.case_id;
        if (place.kind == PlaceKind::Resource && e.resource) return tok.case_id == e.resource;
        return true;
      };
      auto toks = m.tokens(p);
      if (std::any_of(toks.begin(), toks.end(), fits)) continue;
      Token tok;
      tok.available_at = t_;
      if (place.kind == PlaceKind::Resource) {
        tok.case_id = e.resource.value_or("unknown");
      } else {
        tok.case_id = e.case_id;
        for (const auto& a : place.attributes) {
          auto it = e.attrs.find(a.name);
          if (it != e.attrs.end()) tok.attrs.emplace(a.name, it->second);
        }
      }
      m.add(p, std::move(tok));
    }
    auto y = best_binding(m, e);
    if (y) m = fire(net_, m, e.label, *y, t_, e.complete - t_);
  }

  const Net& net_;
  Time t_;
  bool check_;
};

}  // namespace

ReplayResult replay(const Log& log, const Net& net, const ReplayOptions& opts) {
  std::set<std::string> labels;
  for (const auto& e : log.events) {
    const auto* t = net.find_transition(e.label);
    if (!t || !t->is_task)
      throw ValidationError("log activity '" + e.label + "' (case " + e.case_id + ") is not a task transition of the net");
    labels.insert(e.label);
  }

  std::map<Time, std::vector<const Event*>> by_start;
  for (const auto& e : log.events) by_start[e.start].push_back(&e);
  auto injections = infer_arrivals(log, net, labels);
  std::set<Time> times;
  for (const auto& [t, evs] : by_start) times.insert(t);
  for (const auto& inj : injections) times.insert(inj.at);

  ReplayResult out;
  MoveStats stats;
  Marking m = net.initial_marking();
  auto next_injection = injections.begin();
  for (Time t : times) {
    StateSample sample;
    sample.time = t;
    sample.marking = m;
    for (; next_injection != injections.end() && next_injection->at <= t; ++next_injection) {
      m = emit_case(net, m, next_injection->source, next_injection->token);
      ++out.report.inferred_arrivals;
    }
    auto it = by_start.find(t);
    if (it == by_start.end()) continue;
    const auto& events = it->second;

    std::set<std::string> fired;
    for (const auto* e : events) fired.insert(e->label);
    InstantReplay instant(net, t, opts.check_guards);
    for (const auto& label : fired) {
      Marking d = m;
      if (fired.size() > 1) {
        std::vector<const Event*> others;
        for (const auto* e : events)
          if (e->label != label) others.push_back(e);
        instant.run(d, others, false, nullptr, nullptr);
      }
      sample.decision.emplace(label, std::move(d));
    }
    std::size_t before = out.report.unmatched.size();
    instant.run(m, events, true, &stats, &out.report.unmatched);
    sample.flagged = out.report.unmatched.size() > before;
    sample.settled = m;
    sample.fired = std::move(fired);
    out.samples.push_back(std::move(sample));
  }
  out.report.matched = stats.matched;
  out.report.exact_time_matches = stats.exact;
  out.report.mean_time_gap = stats.matched ? stats.gap_sum / static_cast<double>(stats.matched) : 0.0;
  return out;
}

}  // namespace dsync
