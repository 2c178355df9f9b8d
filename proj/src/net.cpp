#include "dsync/net.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dsync {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string> kNoNodes;
const std::string kNoPlace;

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::string_view key)
    : engine_(splitmix64(seed ^ splitmix64(fnv1a(key)))) {}

double RandomStream::uniform01() {
  // 53 random bits mapped onto [0, 1); identical on every platform
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double DelaySpec::sample(RandomStream& rng) const {
  switch (kind) {
    case Kind::Constant: return a;
    case Kind::Uniform: return a + (b - a) * rng.uniform01();
    case Kind::Exponential: return -a * std::log1p(-rng.uniform01());
  }
  return a;
}

std::optional<std::string> DelaySpec::problem() const {
  switch (kind) {
    case Kind::Constant:
      if (a < 0) return "constant delay is negative";
      break;
    case Kind::Uniform:
      if (a < 0 || b < a) return "uniform delay needs 0 <= lo <= hi";
      break;
    case Kind::Exponential:
      if (a < 0) return "exponential mean is negative";
      break;
  }
  return std::nullopt;
}

Value AttrGenerator::sample(RandomStream& rng) const {
  switch (kind) {
    case Kind::Constant: return values.at(0);
    case Kind::Uniform: return lo + (hi - lo) * rng.uniform01();
    case Kind::UniformInt: {
      auto span = static_cast<double>(static_cast<long long>(hi) - static_cast<long long>(lo) + 1);
      return std::floor(lo + span * rng.uniform01());
    }
    case Kind::Bernoulli: return rng.uniform01() < lo ? 1.0 : 0.0;
    case Kind::Choice: {
      auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(values.size()));
      return values.at(std::min(i, values.size() - 1));
    }
  }
  return 0.0;
}

AttrType AttrGenerator::type() const {
  if (kind == Kind::Constant || kind == Kind::Choice) {
    if (values.empty()) return AttrType::Text;
    if (is_number(values[0])) return AttrType::Number;
    if (is_bool(values[0])) return AttrType::Boolean;
    return AttrType::Text;
  }
  return AttrType::Number;
}

std::string_view to_string(PlaceKind kind) {
  switch (kind) {
    case PlaceKind::Case: return "case";
    case PlaceKind::Resource: return "resource";
    case PlaceKind::Plain: return "plain";
  }
  return "plain";
}

PlaceKind parse_place_kind(std::string_view text) {
  if (text == "case") return PlaceKind::Case;
  if (text == "resource") return PlaceKind::Resource;
  if (text == "plain") return PlaceKind::Plain;
  throw ValidationError("unknown place kind '" + std::string(text) + "'");
}

const Attribute* Place::attribute(std::string_view name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Net

Net::Net(std::string name, std::vector<Place> places, std::vector<Transition> transitions,
         std::vector<Flow> flows, Marking initial_marking)
    : name_(std::move(name)),
      places_(std::move(places)),
      transitions_(std::move(transitions)),
      flows_(std::move(flows)),
      initial_(std::move(initial_marking)) {
  index();
}

void Net::index() {
  place_index_.clear();
  transition_index_.clear();
  preset_.clear();
  postset_.clear();
  case_source_.clear();
  for (std::size_t i = 0; i < places_.size(); ++i) place_index_.emplace(places_[i].id, i);
  for (std::size_t i = 0; i < transitions_.size(); ++i)
    transition_index_.emplace(transitions_[i].id, i);
  for (const auto& f : flows_) {
    preset_[f.target].push_back(f.source);
    postset_[f.source].push_back(f.target);
  }
  for (auto* sets : {&preset_, &postset_}) {
    for (auto& [_, ids] : *sets) {
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
  }
  for (const auto& t : transitions_) {
    std::string src = t.case_source;
    if (src.empty()) {
      for (const auto& f : flows_) {
        if (f.target != t.id) continue;
        const auto* p = find_place(f.source);
        if (p && p->kind == PlaceKind::Case) {
          src = p->id;
          break;
        }
      }
    }
    case_source_[t.id] = src;
  }
}

const Place* Net::find_place(std::string_view id) const {
  auto it = place_index_.find(id);
  return it == place_index_.end() ? nullptr : &places_[it->second];
}

const Transition* Net::find_transition(std::string_view id) const {
  auto it = transition_index_.find(id);
  return it == transition_index_.end() ? nullptr : &transitions_[it->second];
}

const Place& Net::place(std::string_view id) const {
  const auto* p = find_place(id);
  if (!p) throw Error("unknown place '" + std::string(id) + "'");
  return *p;
}

const Transition& Net::transition(std::string_view id) const {
  const auto* t = find_transition(id);
  if (!t) throw Error("unknown transition '" + std::string(id) + "'");
  return *t;
}

bool Net::has_node(std::string_view id) const {
  return find_place(id) != nullptr || find_transition(id) != nullptr;
}

const std::vector<std::string>& Net::preset(std::string_view node) const {
  if (!has_node(node)) throw Error("unknown node '" + std::string(node) + "'");
  auto it = preset_.find(node);
  return it == preset_.end() ? kNoNodes : it->second;
}

const std::vector<std::string>& Net::postset(std::string_view node) const {
  if (!has_node(node)) throw Error("unknown node '" + std::string(node) + "'");
  auto it = postset_.find(node);
  return it == postset_.end() ? kNoNodes : it->second;
}

bool Net::has_flow(std::string_view source, std::string_view target) const {
  auto it = postset_.find(source);
  if (it == postset_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), target);
}

const std::string& Net::case_source(std::string_view transition) const {
  auto it = case_source_.find(transition);
  return it == case_source_.end() ? kNoPlace : it->second;
}

Net Net::with_guard(std::string_view transition, std::optional<Constraint> guard) const {
  Net out = *this;
  for (auto& t : out.transitions_) {
    if (t.id == transition) {
      t.guard = guard && !guard->empty() ? std::move(guard) : std::nullopt;
      return out;
    }
  }
  throw Error("unknown transition '" + std::string(transition) + "'");
}

Net Net::without_guards() const {
  Net out = *this;
  for (auto& t : out.transitions_) t.guard.reset();
  return out;
}

bool is_case_place(const Net& net, std::string_view place) {
  const auto* p = net.find_place(place);
  return p && p->kind == PlaceKind::Case;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_feature_refs(const Net& net, const FeatureRef& f, const std::string& where,
                        std::vector<std::string>& out) {
  if (f.kind == FeatureKind::Ratio) {
    for (const auto& op : f.operands) check_feature_refs(net, op, where, out);
    return;
  }
  const auto* p = net.find_place(f.place);
  if (!p) {
    out.push_back(where + ": guard references unknown place '" + f.place + "'");
    return;
  }
  if (f.kind == FeatureKind::AttrVal || f.kind == FeatureKind::AttrEnabled) {
    const auto* a = p->attribute(f.attr);
    if (!a)
      out.push_back(where + ": guard references undeclared attribute '" + f.attr + "' of place '" +
                    f.place + "'");
    else if (a->type == AttrType::Text)
      out.push_back(where + ": attribute '" + f.attr + "' is text and cannot be aggregated");
  }
}

bool value_has_type(const Value& v, AttrType t) {
  switch (t) {
    case AttrType::Number: return is_number(v);
    case AttrType::Boolean: return is_bool(v);
    case AttrType::Text: return std::holds_alternative<std::string>(v);
  }
  return false;
}

}  // namespace

std::vector<std::string> validate_net(const Net& net) {
  std::vector<std::string> out;
  std::set<std::string> ids;
  for (const auto& p : net.places()) {
    if (p.id.empty()) out.push_back("place with empty id");
    if (!ids.insert(p.id).second) out.push_back("duplicate id '" + p.id + "'");
    if (p.kind == PlaceKind::Resource && !p.attributes.empty())
      out.push_back("resource place '" + p.id + "' declares attributes");
    std::set<std::string> names;
    for (const auto& a : p.attributes)
      if (!names.insert(a.name).second)
        out.push_back("place '" + p.id + "' declares attribute '" + a.name + "' twice");
  }
  for (const auto& t : net.transitions()) {
    if (t.id.empty()) out.push_back("transition with empty id");
    if (!ids.insert(t.id).second) out.push_back("duplicate id '" + t.id + "'");
  }

  std::set<std::pair<std::string, std::string>> seen_flows;
  for (const auto& f : net.flows()) {
    std::string label = "flow " + f.source + " -> " + f.target;
    bool src_place = net.find_place(f.source) != nullptr;
    bool dst_place = net.find_place(f.target) != nullptr;
    bool src_trans = net.find_transition(f.source) != nullptr;
    bool dst_trans = net.find_transition(f.target) != nullptr;
    if (!src_place && !src_trans) out.push_back(label + ": unknown source '" + f.source + "'");
    if (!dst_place && !dst_trans) out.push_back(label + ": unknown target '" + f.target + "'");
    if (src_place && dst_place) out.push_back(label + ": connects two places");
    if (src_trans && dst_trans) out.push_back(label + ": connects two transitions");
    if (!seen_flows.insert({f.source, f.target}).second) out.push_back(label + ": duplicate flow");
  }
  if (!out.empty()) return out;  // the remaining checks rely on a sound graph

  std::set<std::string> prefixes;
  std::size_t sources = 0;
  for (const auto& t : net.transitions()) {
    std::string where = "transition '" + t.id + "'";
    const auto& pre = net.preset(t.id);
    const auto& post = net.postset(t.id);
    if (auto problem = t.delay.problem()) out.push_back(where + ": " + *problem);
    bool has_resource_in = false;
    for (const auto& p : pre)
      if (net.place(p).kind == PlaceKind::Resource) has_resource_in = true;
    if (t.arrival) {
      ++sources;
      if (!pre.empty()) out.push_back(where + ": arrival spec on a transition with a nonempty preset");
      if (auto problem = t.arrival->interarrival.problem()) out.push_back(where + ": interarrival " + *problem);
      if (t.arrival->max_count == 0) out.push_back(where + ": arrival max_count must be >= 1");
      if (!prefixes.insert(t.arrival->case_prefix).second)
        out.push_back(where + ": case prefix '" + t.arrival->case_prefix + "' shared with another source");
      for (const auto& q : post)
        if (net.place(q).kind == PlaceKind::Resource)
          out.push_back(where + ": source transition feeds resource place '" + q + "'");
    } else {
      const auto& src = net.case_source(t.id);
      if (!t.case_source.empty() && !is_case_place(net, t.case_source))
        out.push_back(where + ": case_source '" + t.case_source + "' is not a case place");
      else if (!t.case_source.empty() && !net.has_flow(t.case_source, t.id))
        out.push_back(where + ": case_source '" + t.case_source + "' is not an input place");
      if (t.is_task && src.empty()) out.push_back(where + ": task transition without a case input place");
      for (const auto& q : post) {
        auto kind = net.place(q).kind;
        if (kind == PlaceKind::Case && src.empty())
          out.push_back(where + ": produces into case place '" + q + "' without a case input");
        if (kind == PlaceKind::Resource && !has_resource_in)
          out.push_back(where + ": produces into resource place '" + q + "' without a resource input");
      }
    }
    if (t.batch && (pre.size() != 1 || !is_case_place(net, pre.front())))
      out.push_back(where + ": batch transition needs exactly one input place, a case place");
    if (t.select) {
      const auto& src = net.case_source(t.id);
      const auto* p = src.empty() ? nullptr : net.find_place(src);
      if (!p || !p->attribute(t.select->attr))
        out.push_back(where + ": select attribute '" + t.select->attr + "' not declared on its case input");
    }
    if (t.guard)
      for (const auto& a : t.guard->atoms) check_feature_refs(net, a.feature, where, out);
  }
  if (sources > 1 && prefixes.count("")) {
    // several sources need distinct, non-empty prefixes to keep case ids unique
    out.push_back("multiple source transitions require non-empty case prefixes");
  }

  for (const auto& [place_id, bag] : net.initial_marking().places()) {
    const auto* p = net.find_place(place_id);
    if (!p) {
      out.push_back("initial marking references unknown place '" + place_id + "'");
      continue;
    }
    for (const auto& tok : bag) {
      std::string where = "initial token " + describe(tok) + " in '" + place_id + "'";
      if (tok.available_at < 0) out.push_back(where + ": negative availability");
      if (p->kind != PlaceKind::Plain && !tok.case_id) out.push_back(where + ": missing identifier");
      if (p->kind == PlaceKind::Resource && !tok.attrs.empty())
        out.push_back(where + ": resource tokens carry no attributes");
      for (const auto& [k, v] : tok.attrs) {
        const auto* a = p->attribute(k);
        if (!a) out.push_back(where + ": undeclared attribute '" + k + "'");
        else if (!value_has_type(v, a->type)) out.push_back(where + ": attribute '" + k + "' has wrong type");
      }
    }
  }
  return out;
}

void require_valid(const Net& net) {
  auto problems = validate_net(net);
  if (problems.empty()) return;
  std::string msg = "invalid net '" + net.name() + "':";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------
// Token game

std::vector<Binding> enabled_bindings(const Net& net, const Marking& m, std::string_view transition,
                                      Time now, bool check_guard) {
  const auto& t = net.transition(transition);
  if (check_guard && t.guard && !eval_constraint(*t.guard, m, now)) return {};
  const auto& pre = net.preset(t.id);
  std::vector<std::vector<const Token*>> choices;
  choices.reserve(pre.size());
  for (const auto& p : pre) {
    std::vector<const Token*> options;
    for (const auto& tok : m.tokens(p)) {
      if (!tok.enabled_at(now)) break;  // sorted by availability
      if (!options.empty() && *options.back() == tok) continue;  // identical tokens bind identically
      options.push_back(&tok);
    }
    if (options.empty()) return {};
    choices.push_back(std::move(options));
  }
  std::vector<Binding> out;
  std::vector<std::size_t> idx(pre.size(), 0);
  while (true) {
    Binding y;
    for (std::size_t i = 0; i < pre.size(); ++i) y.emplace(pre[i], *choices[i][idx[i]]);
    out.push_back(std::move(y));
    // odometer increment, last place varies fastest
    std::size_t k = pre.size();
    while (k > 0) {
      --k;
      if (++idx[k] < choices[k].size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (pre.empty()) return out;
  }
}

bool is_enabled(const Net& net, const Marking& m, std::string_view transition, Time now,
                bool check_guard) {
  const auto& t = net.transition(transition);
  if (check_guard && t.guard && !eval_constraint(*t.guard, m, now)) return false;
  for (const auto& p : net.preset(t.id))
    if (m.count_enabled(p, now) == 0) return false;
  return true;
}

Marking fire(const Net& net, const Marking& m, std::string_view transition, const Binding& y,
             Time now, Time delay) {
  const auto& t = net.transition(transition);
  const auto& pre = net.preset(t.id);
  if (y.size() != pre.size()) throw Error("binding of '" + t.id + "' does not cover its preset");
  Marking out = m;
  const Token* resource = nullptr;
  for (const auto& p : pre) {
    auto it = y.find(p);
    if (it == y.end()) throw Error("binding of '" + t.id + "' misses place '" + p + "'");
    if (!out.remove(p, it->second))
      throw Error("token " + describe(it->second) + " not present in place '" + p + "'");
    if (!resource && net.place(p).kind == PlaceKind::Resource) resource = &it->second;
  }
  const auto& src = net.case_source(t.id);
  const Token* primary = nullptr;
  if (!src.empty()) primary = &y.at(src);

  Time at = now + std::max(delay, 0.0);
  for (const auto& q : net.postset(t.id)) {
    const auto& place = net.place(q);
    Token tok;
    tok.available_at = at;
    switch (place.kind) {
      case PlaceKind::Case:
        if (!primary) throw Error("transition '" + t.id + "' has no case input to produce into '" + q + "'");
        tok.case_id = primary->case_id;
        for (const auto& a : place.attributes) {
          auto it = primary->attrs.find(a.name);
          if (it != primary->attrs.end()) tok.attrs.emplace(a.name, it->second);
        }
        break;
      case PlaceKind::Resource:
        if (!resource) throw Error("transition '" + t.id + "' has no resource input to return to '" + q + "'");
        tok.case_id = resource->case_id;
        break;
      case PlaceKind::Plain:
        if (primary) tok.case_id = primary->case_id;
        break;
    }
    out.add(q, std::move(tok));
  }
  return out;
}

Marking fire(const Net& net, const Marking& m, std::string_view transition, const Binding& y,
             Time now, RandomStream& rng) {
  return fire(net, m, transition, y, now, net.transition(transition).delay.sample(rng));
}

Marking emit_case(const Net& net, const Marking& m, std::string_view source, const Token& case_token) {
  const auto& t = net.transition(source);
  Marking out = m;
  for (const auto& q : net.postset(t.id)) {
    const auto& place = net.place(q);
    Token tok;
    tok.case_id = case_token.case_id;
    tok.available_at = case_token.available_at;
    if (place.kind == PlaceKind::Case) {
      for (const auto& a : place.attributes) {
        auto it = case_token.attrs.find(a.name);
        if (it != case_token.attrs.end()) tok.attrs.emplace(a.name, it->second);
      }
    } else if (place.kind == PlaceKind::Resource) {
      throw Error("source '" + t.id + "' cannot produce into resource place '" + q + "'");
    }
    out.add(q, std::move(tok));
  }
  return out;
}

std::vector<std::pair<std::string, Constraint>> ground_truth(const Net& net) {
  std::vector<std::pair<std::string, Constraint>> out;
  for (const auto& t : net.transitions())
    if (t.guard && !t.guard->empty()) out.emplace_back(t.id, *t.guard);
  return out;
}

}  // namespace dsync
