#include "dsync/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dsync {

std::vector<std::string> validate_config(const SimConfig& cfg) {
  std::vector<std::string> out;
  bool bounded_horizon = std::isfinite(cfg.horizon);
  if (std::isnan(cfg.horizon) || cfg.horizon <= 0) out.push_back("horizon must be positive");
  if (cfg.max_cases == 0 && !bounded_horizon) out.push_back("max_cases must be >= 1 when no horizon is given");
  return out;
}

namespace {

constexpr std::size_t kMaxFiringsPerInstant = 1'000'000;

struct Source {
  const Transition* t = nullptr;
  std::size_t emitted = 0;
  Time next_fire = 0;
  Time next_avail = 0;
  RandomStream interarrival;
  std::vector<RandomStream> attr_streams;

  bool done() const { return emitted >= t->arrival->max_count; }
};

struct Choice {
  const Transition* t = nullptr;
  Binding binding;
  Time newest = 0;
  std::string case_id;
};

class Simulation {
 public:
  Simulation(const Net& net, const SimConfig& cfg) : net_(net), cfg_(cfg), m_(net.initial_marking()) {
    for (const auto& p : net.places())
      if (p.kind == PlaceKind::Case) {
        (net.postset(p.id).empty() ? sink_places_ : case_places_).push_back(p.id);
        for (const auto& tok : m_.tokens(p.id))
          if (tok.case_id) open_.insert(*tok.case_id);
      }
    for (const auto& t : net.transitions()) {
      if (t.is_source()) {
        Source s{&t, 0, t.arrival->first_at, t.arrival->first_at, RandomStream(cfg.seed, "interarrival:" + t.id), {}};
        for (const auto& [name, gen] : t.arrival->attributes)
          s.attr_streams.emplace_back(cfg.seed, "attr:" + t.id + ":" + name);
        sources_.push_back(std::move(s));
      } else {
        delay_streams_.emplace(t.id, RandomStream(cfg.seed, "delay:" + t.id));
      }
    }
  }

  Log run() {
    auto start = next_wakeup(-std::numeric_limits<Time>::infinity());
    if (!start) throw SimulationError("deadlock: nothing can happen in the initial marking\n" + describe(m_));
    now_ = *start;
    std::optional<Time> cutoff;
    while (now_ <= cfg_.horizon) {
      run_instant();
      settle_completions();
      if (cfg_.max_cases > 0 && completed_.size() >= cfg_.max_cases) {
        cutoff = now_;
        break;
      }
      auto next = next_wakeup(now_);
      if (!next) break;
      if (*next > cfg_.horizon) cutoff = cfg_.horizon;
      now_ = *next;
    }
    // cases that have not arrived by the stop time do not exist yet
    if (cutoff)
      std::erase_if(events_, [&](const Event& e) {
        const auto* t = net_.find_transition(e.label);
        return t && t->is_source() && e.complete > *cutoff;
      });
    if (events_.empty())
      throw SimulationError("deadlock before any event at time " + format_number(now_) + "; final marking:\n" +
                            describe(m_));
    return make_log(std::move(events_), schema());
  }

 private:
  void run_instant() {
    std::size_t firings = 0;
    auto count = [&] {
      if (++firings > kMaxFiringsPerInstant)
        throw SimulationError("livelock: too many firings at time " + format_number(now_));
    };
    while (true) {
      for (auto& s : sources_)
        while (!s.done() && s.next_fire <= now_) {
          fire_source(s);
          count();
        }
      while (auto c = pick(false)) {
        fire_choice(*c);
        count();
      }
      if (auto c = pick(true)) {
        fire_choice(*c);
        count();
        continue;
      }
      break;
    }
  }

  void fire_source(Source& s) {
    const auto& spec = *s.t->arrival;
    ++s.emitted;
    Token tok;
    tok.case_id = spec.case_prefix + std::to_string(s.emitted);
    tok.available_at = s.next_avail;
    for (std::size_t i = 0; i < spec.attributes.size(); ++i)
      tok.attrs.emplace(spec.attributes[i].first, spec.attributes[i].second.sample(s.attr_streams[i]));
    m_ = emit_case(net_, m_, s.t->id, tok);
    open_.insert(*tok.case_id);
    if (s.t->is_task) events_.push_back(Event{*tok.case_id, s.t->id, now_, tok.available_at, std::nullopt, tok.attrs});
    s.next_fire = s.next_avail;
    s.next_avail += spec.interarrival.sample(s.interarrival);
  }

  bool better(const Choice& a, const Choice& b) const {
    if (a.newest != b.newest) return cfg_.policy == Policy::Fifo ? a.newest < b.newest : a.newest > b.newest;
    if (a.case_id != b.case_id) return a.case_id < b.case_id;
    return a.t->id < b.t->id;
  }

  std::optional<Choice> best_for(const Transition& t) const {
    if (!is_enabled(net_, m_, t.id, now_)) return std::nullopt;
    const auto& src = net_.case_source(t.id);
    if (t.batch) {
      const auto& place = net_.preset(t.id).front();
      Choice c{&t, {}, 0, {}};
      for (const auto& tok : m_.tokens(place)) {
        if (!tok.enabled_at(now_)) break;
        c.newest = std::max(c.newest, tok.available_at);
        if (c.case_id.empty() && tok.case_id) c.case_id = *tok.case_id;
      }
      return c;
    }
    std::optional<Choice> best;
    double best_sel = 0;
    for (auto& y : enabled_bindings(net_, m_, t.id, now_)) {
      Choice c{&t, {}, 0, {}};
      for (const auto& [p, tok] : y) c.newest = std::max(c.newest, tok.available_at);
      double sel = 0;
      if (!src.empty()) {
        const auto& primary = y.at(src);
        c.case_id = primary.case_id.value_or("");
        if (t.select) {
          auto it = primary.attrs.find(t.select->attr);
          if (it != primary.attrs.end() && !std::holds_alternative<std::string>(it->second))
            sel = t.select->maximize ? as_number(it->second) : -as_number(it->second);
          else
            sel = -HUGE_VAL;
        }
      }
      c.binding = std::move(y);
      if (!best || sel > best_sel || (sel == best_sel && better(c, *best))) {
        best = std::move(c);
        best_sel = sel;
      }
    }
    return best;
  }

  std::optional<Choice> pick(bool guarded) const {
    std::optional<Choice> best;
    for (const auto& t : net_.transitions()) {
      if (t.is_source() || t.guard.has_value() != guarded) continue;
      auto c = best_for(t);
      if (c && (!best || better(*c, *best))) best = std::move(c);
    }
    return best;
  }

  void fire_choice(const Choice& c) {
    const auto& t = *c.t;
    Time delay = t.delay.sample(delay_streams_.at(t.id));
    std::vector<Binding> moves;
    if (t.batch) {
      const auto& place = net_.preset(t.id).front();
      for (const auto& tok : m_.tokens(place)) {
        if (!tok.enabled_at(now_)) break;
        moves.push_back(Binding{{place, tok}});
      }
    } else {
      moves.push_back(c.binding);
    }
    const auto& src = net_.case_source(t.id);
    for (const auto& y : moves) {
      m_ = fire(net_, m_, t.id, y, now_, delay);
      if (t.is_task) {
        Event e;
        e.start = now_;
        e.complete = now_ + std::max(delay, 0.0);
        e.label = t.id;
        if (!src.empty()) {
          const auto& primary = y.at(src);
          e.case_id = primary.case_id.value_or("");
          e.attrs = primary.attrs;
        }
        for (const auto& [p, tok] : y)
          if (net_.place(p).kind == PlaceKind::Resource) {
            e.resource = tok.case_id;
            break;
          }
        events_.push_back(std::move(e));
      }
    }
  }

  // A case is complete once none of its tokens can move any more: every token
  // has left the case places, or rests available in a place nothing consumes.
  void settle_completions() {
    std::set<std::string> busy;
    for (const auto& p : case_places_)
      for (const auto& tok : m_.tokens(p))
        if (tok.case_id) busy.insert(*tok.case_id);
    for (const auto& p : sink_places_)
      for (const auto& tok : m_.tokens(p))
        if (tok.case_id && !tok.enabled_at(now_)) busy.insert(*tok.case_id);
    for (auto it = open_.begin(); it != open_.end();) {
      if (busy.count(*it)) {
        ++it;
        continue;
      }
      completed_.insert(*it);
      it = open_.erase(it);
    }
  }

  std::optional<Time> next_wakeup(Time after) const {
    std::optional<Time> next;
    auto consider = [&](Time x) {
      if (x > after && (!next || x < *next)) next = x;
    };
    for (const auto& s : sources_)
      if (!s.done()) consider(s.next_fire);
    for (const auto& [p, bag] : m_.places())
      for (const auto& tok : bag) consider(tok.available_at);
    // a pending token starts satisfying `timeuntilnext(p) <= c` before it arrives
    for (const auto& t : net_.transitions()) {
      if (!t.guard) continue;
      for (const auto& a : t.guard->atoms) {
        if (a.feature.kind != FeatureKind::TimeUntilNext || (a.op != CmpOp::Le && a.op != CmpOp::Lt)) continue;
        double c = as_number(a.constant);
        for (const auto& tok : m_.tokens(a.feature.place)) {
          Time x = tok.available_at - c;
          if (a.op == CmpOp::Lt) x = std::nextafter(x, HUGE_VAL);
          consider(x);
        }
      }
    }
    return next;
  }

  std::vector<Attribute> schema() const {
    std::set<std::string> used;
    for (const auto& e : events_)
      for (const auto& [k, v] : e.attrs) used.insert(k);
    std::vector<Attribute> out;
    for (const auto& p : net_.places()) {
      if (p.kind != PlaceKind::Case) continue;
      for (const auto& a : p.attributes)
        if (used.erase(a.name)) out.push_back(a);
    }
    return out;
  }

  const Net& net_;
  const SimConfig& cfg_;
  Marking m_;
  Time now_ = 0;
  std::vector<std::string> case_places_, sink_places_;
  std::vector<Source> sources_;
  std::map<std::string, RandomStream> delay_streams_;
  std::vector<Event> events_;
  std::set<std::string> open_, completed_;
};

}  // namespace

Log simulate(const Net& net, const SimConfig& cfg) {
  if (auto problems = validate_config(cfg); !problems.empty()) throw ValidationError("simulation config: " + problems.front());
  require_valid(net);
  return Simulation(net, cfg).run();
}

}  // namespace dsync
