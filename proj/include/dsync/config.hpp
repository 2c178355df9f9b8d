#pragma once

// Run configuration file: `key = value` lines, optional `[section]` headers
// that prefix the following keys, `#` comments. Recognized keys:
//
//   [tree]     max_depth, min_samples_leaf, min_impurity_decrease
//   [extract]  tau_s, tau_g, min_coverage
//   [sim]      seed, max_cases, horizon, policy (fifo | lifo)
//   [log]      iso_time (true | false)

#include <string>
#include <string_view>

#include "json.hpp"

#include "dsync/event_log.hpp"
#include "dsync/extraction.hpp"
#include "dsync/simulator.hpp"

namespace dsync {

struct RunConfig {
  TreeParams tree;
  ExtractionParams extract;
  SimConfig sim;
  CsvOptions csv;
};

/// Applies the settings in `text` on top of `base`. Unknown keys and bad
/// values raise ValidationError naming the line.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
/// Applies one `section.key` setting.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> validate(const RunConfig& cfg);
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace dsync
