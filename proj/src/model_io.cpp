#include "dsync/model_io.hpp"

#include <fstream>
#include <sstream>

namespace dsync {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw ValidationError("model: " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double number_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number()) schema_error(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

Value value_from_json(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  schema_error(where + ": attribute values must be number, boolean or string");
}

ordered_json value_to_json(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  return std::get<std::string>(v);
}

DelaySpec delay_from_json(const json& d, const std::string& where) {
  if (d.is_number()) return DelaySpec::constant(d.get<double>());
  auto type = require(d, "type", where).get<std::string>();
  if (type == "constant") return DelaySpec::constant(number_field(d, "value", where));
  if (type == "uniform") return DelaySpec::uniform(number_field(d, "lo", where), number_field(d, "hi", where));
  if (type == "exponential") return DelaySpec::exponential(number_field(d, "mean", where));
  schema_error(where + ": unknown delay type '" + type + "'");
}

AttrGenerator generator_from_json(const json& g, const std::string& where) {
  AttrGenerator out;
  auto type = require(g, "type", where).get<std::string>();
  if (type == "constant") {
    out.kind = AttrGenerator::Kind::Constant;
    out.values = {value_from_json(require(g, "value", where), where)};
  } else if (type == "uniform" || type == "uniform_int") {
    out.kind = type == "uniform" ? AttrGenerator::Kind::Uniform : AttrGenerator::Kind::UniformInt;
    out.lo = number_field(g, "lo", where);
    out.hi = number_field(g, "hi", where);
    if (out.hi < out.lo) schema_error(where + ": hi < lo");
  } else if (type == "bernoulli") {
    out.kind = AttrGenerator::Kind::Bernoulli;
    out.lo = number_field(g, "p", where);
    if (out.lo < 0 || out.lo > 1) schema_error(where + ": p outside [0, 1]");
  } else if (type == "choice") {
    out.kind = AttrGenerator::Kind::Choice;
    for (const auto& v : require(g, "values", where)) out.values.push_back(value_from_json(v, where));
    if (out.values.empty()) schema_error(where + ": choice needs at least one value");
  } else {
    schema_error(where + ": unknown generator type '" + type + "'");
  }
  return out;
}

ordered_json generator_to_json(const AttrGenerator& g) {
  ordered_json out;
  switch (g.kind) {
    case AttrGenerator::Kind::Constant:
      out["type"] = "constant";
      out["value"] = value_to_json(g.values.at(0));
      break;
    case AttrGenerator::Kind::Uniform:
    case AttrGenerator::Kind::UniformInt:
      out["type"] = g.kind == AttrGenerator::Kind::Uniform ? "uniform" : "uniform_int";
      out["lo"] = g.lo;
      out["hi"] = g.hi;
      break;
    case AttrGenerator::Kind::Bernoulli:
      out["type"] = "bernoulli";
      out["p"] = g.lo;
      break;
    case AttrGenerator::Kind::Choice: {
      out["type"] = "choice";
      auto values = ordered_json::array();
      for (const auto& v : g.values) values.push_back(value_to_json(v));
      out["values"] = values;
      break;
    }
  }
  return out;
}

Token token_from_json(const json& j, const std::string& where) {
  Token tok;
  if (j.is_string()) {
    tok.case_id = j.get<std::string>();
    return tok;
  }
  if (!j.is_object()) schema_error(where + ": token must be an object or an id string");
  if (j.contains("id")) tok.case_id = j.at("id").get<std::string>();
  if (j.contains("at")) tok.available_at = j.at("at").get<double>();
  if (j.contains("attrs"))
    for (const auto& [k, v] : j.at("attrs").items()) tok.attrs.emplace(k, value_from_json(v, where));
  return tok;
}

ordered_json token_to_json(const Token& tok) {
  ordered_json out;
  if (tok.case_id) out["id"] = *tok.case_id;
  if (tok.available_at != 0) out["at"] = tok.available_at;
  if (!tok.attrs.empty()) {
    ordered_json attrs;
    for (const auto& [k, v] : tok.attrs) attrs[k] = value_to_json(v);
    out["attrs"] = attrs;
  }
  return out;
}

}  // namespace

ordered_json delay_to_json(const DelaySpec& d) {
  ordered_json out;
  switch (d.kind) {
    case DelaySpec::Kind::Constant:
      out["type"] = "constant";
      out["value"] = d.a;
      break;
    case DelaySpec::Kind::Uniform:
      out["type"] = "uniform";
      out["lo"] = d.a;
      out["hi"] = d.b;
      break;
    case DelaySpec::Kind::Exponential:
      out["type"] = "exponential";
      out["mean"] = d.a;
      break;
  }
  return out;
}

Net net_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("document must be a JSON object");
  if (doc.contains("format") && doc.at("format") != kModelFormat)
    schema_error("unsupported format '" + doc.at("format").dump() + "', expected " + kModelFormat);
  std::string name = doc.value("name", std::string{});

  std::vector<Place> places;
  for (const auto& p : require(doc, "places", "document")) {
    Place place;
    place.id = require(p, "id", "place").get<std::string>();
    std::string where = "place '" + place.id + "'";
    place.kind = parse_place_kind(p.value("kind", std::string("plain")));
    if (p.contains("attributes")) {
      for (const auto& a : p.at("attributes")) {
        Attribute attr;
        attr.name = require(a, "name", where).get<std::string>();
        attr.type = parse_attr_type(a.value("type", std::string("number")));
        place.attributes.push_back(std::move(attr));
      }
    }
    places.push_back(std::move(place));
  }

  std::vector<Transition> transitions;
  for (const auto& t : require(doc, "transitions", "document")) {
    Transition tr;
    tr.id = require(t, "id", "transition").get<std::string>();
    std::string where = "transition '" + tr.id + "'";
    tr.is_task = t.value("task", true);
    if (t.contains("delay")) tr.delay = delay_from_json(t.at("delay"), where);
    if (t.contains("guard") && !t.at("guard").is_null()) {
      auto text = t.at("guard").get<std::string>();
      try {
        auto g = parse_constraint(text);
        if (!g.empty()) tr.guard = std::move(g);
      } catch (const ParseError& e) {
        schema_error(where + ": guard: " + e.what());
      }
    }
    if (t.contains("select")) {
      const auto& s = t.at("select");
      tr.select = Selection{require(s, "attr", where).get<std::string>(), s.value("order", std::string("max")) != "min"};
    }
    tr.batch = t.value("batch", false);
    tr.case_source = t.value("case_source", std::string{});
    if (t.contains("arrival")) {
      const auto& a = t.at("arrival");
      ArrivalSpec spec;
      spec.interarrival = delay_from_json(require(a, "interarrival", where), where + " interarrival");
      if (a.contains("attributes"))
        for (const auto& [k, g] : a.at("attributes").items())
          spec.attributes.emplace_back(k, generator_from_json(g, where + " attribute '" + k + "'"));
      spec.max_count = a.value("max_count", std::size_t{1000});
      spec.first_at = a.value("first_at", 0.0);
      spec.case_prefix = a.value("case_prefix", std::string{});
      tr.arrival = std::move(spec);
    }
    transitions.push_back(std::move(tr));
  }

  std::vector<Flow> flows;
  for (const auto& f : require(doc, "flows", "document")) {
    if (f.is_array() && f.size() == 2) {
      flows.push_back({f[0].get<std::string>(), f[1].get<std::string>()});
    } else if (f.is_object()) {
      flows.push_back({require(f, "from", "flow").get<std::string>(), require(f, "to", "flow").get<std::string>()});
    } else {
      schema_error("flows must be [source, target] pairs");
    }
  }

  Marking initial;
  if (doc.contains("initial_marking")) {
    for (const auto& [place, toks] : doc.at("initial_marking").items())
      for (const auto& tok : toks) initial.add(place, token_from_json(tok, "initial marking of '" + place + "'"));
  }
  return Net(std::move(name), std::move(places), std::move(transitions), std::move(flows), std::move(initial));
}

ordered_json net_to_json(const Net& net) {
  ordered_json doc;
  doc["format"] = kModelFormat;
  doc["name"] = net.name();
  auto places = ordered_json::array();
  for (const auto& p : net.places()) {
    ordered_json jp;
    jp["id"] = p.id;
    jp["kind"] = std::string(to_string(p.kind));
    if (!p.attributes.empty()) {
      auto attrs = ordered_json::array();
      for (const auto& a : p.attributes) attrs.push_back({{"name", a.name}, {"type", std::string(to_string(a.type))}});
      jp["attributes"] = attrs;
    }
    places.push_back(jp);
  }
  doc["places"] = places;

  auto transitions = ordered_json::array();
  for (const auto& t : net.transitions()) {
    ordered_json jt;
    jt["id"] = t.id;
    jt["task"] = t.is_task;
    jt["delay"] = delay_to_json(t.delay);
    if (t.guard) jt["guard"] = to_string(*t.guard);
    if (t.select) jt["select"] = {{"attr", t.select->attr}, {"order", t.select->maximize ? "max" : "min"}};
    if (t.batch) jt["batch"] = true;
    if (!t.case_source.empty()) jt["case_source"] = t.case_source;
    if (t.arrival) {
      ordered_json ja;
      ja["interarrival"] = delay_to_json(t.arrival->interarrival);
      ordered_json attrs = ordered_json::object();
      for (const auto& [k, g] : t.arrival->attributes) attrs[k] = generator_to_json(g);
      ja["attributes"] = attrs;
      ja["max_count"] = t.arrival->max_count;
      ja["first_at"] = t.arrival->first_at;
      ja["case_prefix"] = t.arrival->case_prefix;
      jt["arrival"] = ja;
    }
    transitions.push_back(jt);
  }
  doc["transitions"] = transitions;

  auto flows = ordered_json::array();
  for (const auto& f : net.flows()) flows.push_back({f.source, f.target});
  doc["flows"] = flows;

  ordered_json initial = ordered_json::object();
  for (const auto& [place, bag] : net.initial_marking().places()) {
    auto toks = ordered_json::array();
    for (const auto& tok : bag) toks.push_back(token_to_json(tok));
    initial[place] = toks;
  }
  doc["initial_marking"] = initial;
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Net load_net(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("model '" + path.string() + "': " + e.what());
  }
  try {
    return net_from_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError("model '" + path.string() + "': " + e.what());
  }
}

void save_net(const Net& net, const std::filesystem::path& path) {
  write_text_file(path, net_to_json(net).dump(2) + "\n");
}

}  // namespace dsync
