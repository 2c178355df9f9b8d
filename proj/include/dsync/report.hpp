#pragma once

#include <string>

#include "json.hpp"

#include "dsync/config.hpp"
#include "dsync/extraction.hpp"

namespace dsync {

nlohmann::ordered_json to_json(const MatchReport& r);
nlohmann::ordered_json to_json(const PatternConstraint& pc);

/// Discovery report with sections config, replay, candidates, trees,
/// constraints, replayability and skipped.
nlohmann::ordered_json discovery_report(const DiscoveryResult& result, const RunConfig& cfg, const std::string& model,
                                        const std::string& log);

/// Plain-text summary for standard output.
std::string summary_text(const DiscoveryResult& result);

/// Markdown table of modeled vs discovered constraints per transition. The
/// modeled side comes from the guards of `reference` when given.
std::string markdown_report(const nlohmann::json& report, const Net* reference);

}  // namespace dsync
