#include "dsync/config.hpp"

#include <cmath>
#include <sstream>

#include "dsync/model_io.hpp"

namespace dsync {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

double number(const std::string& key, const std::string& value) {
  auto v = value == "inf" ? std::optional<double>(HUGE_VAL) : parse_number(value);
  if (!v) throw ValidationError(key + ": '" + value + "' is not a number");
  return *v;
}

std::size_t count(const std::string& key, const std::string& value) {
  double v = number(key, value);
  if (v < 0 || v != std::floor(v)) throw ValidationError(key + ": '" + value + "' is not a non-negative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

void set_option(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "tree.max_depth") cfg.tree.max_depth = count(key, value);
  else if (key == "tree.min_samples_leaf") cfg.tree.min_samples_leaf = count(key, value);
  else if (key == "tree.min_impurity_decrease") cfg.tree.min_impurity_decrease = number(key, value);
  else if (key == "extract.tau_s") cfg.extract.tau_s = count(key, value);
  else if (key == "extract.tau_g") cfg.extract.tau_g = number(key, value);
  else if (key == "extract.min_coverage") cfg.extract.min_coverage = number(key, value);
  else if (key == "sim.seed") cfg.sim.seed = count(key, value);
  else if (key == "sim.max_cases") cfg.sim.max_cases = count(key, value);
  else if (key == "sim.horizon") cfg.sim.horizon = number(key, value);
  else if (key == "sim.policy") {
    if (value == "fifo") cfg.sim.policy = Policy::Fifo;
    else if (value == "lifo") cfg.sim.policy = Policy::Lifo;
    else throw ValidationError(key + ": expected fifo or lifo, got '" + value + "'");
  } else if (key == "log.iso_time") {
    auto b = parse_bool(value);
    if (!b) throw ValidationError(key + ": expected true or false, got '" + value + "'");
    cfg.csv.iso_time = *b;
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

RunConfig parse_config(std::string_view text, RunConfig cfg) {
  std::istringstream in{std::string(text)};
  std::string line, section;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto s = trim(line);
    if (s.empty()) continue;
    std::string where = "config line " + std::to_string(n) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw ValidationError(where + "unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    auto key = trim(std::string_view(s).substr(0, eq));
    auto value = unquote(trim(std::string_view(s).substr(eq + 1)));
    if (!section.empty()) key = section + "." + key;
    try {
      set_option(cfg, key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  return parse_config(read_text_file(path), std::move(base));
}

std::vector<std::string> validate(const RunConfig& cfg) {
  auto out = validate_params(cfg.tree);
  for (auto& p : validate_params(cfg.extract)) out.push_back(std::move(p));
  for (auto& p : validate_config(cfg.sim)) out.push_back(std::move(p));
  return out;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["tree"] = {{"max_depth", cfg.tree.max_depth},
               {"min_samples_leaf", cfg.tree.min_samples_leaf},
               {"min_impurity_decrease", cfg.tree.min_impurity_decrease}};
  j["extract"] = {{"tau_s", cfg.extract.tau_s}, {"tau_g", cfg.extract.tau_g}, {"min_coverage", cfg.extract.min_coverage}};
  nlohmann::ordered_json sim;
  sim["seed"] = cfg.sim.seed;
  sim["max_cases"] = cfg.sim.max_cases;
  if (std::isfinite(cfg.sim.horizon)) sim["horizon"] = cfg.sim.horizon;
  else sim["horizon"] = "inf";
  sim["policy"] = cfg.sim.policy == Policy::Fifo ? "fifo" : "lifo";
  j["sim"] = sim;
  j["log"] = {{"iso_time", cfg.csv.iso_time}};
  return j;
}

}  // namespace dsync
