#pragma once

#include <string>

#include "json.hpp"

#include "dsync/event_log.hpp"
#include "dsync/model_io.hpp"
#include "dsync/net.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(DSYNC_SOURCE_DIR) + "/" + rel; }

inline dsync::Net bundled(const std::string& name) { return dsync::load_net(source_path("models/" + name + ".json")); }

inline dsync::Net net_from(const std::string& json) { return dsync::net_from_json(nlohmann::json::parse(json)); }

inline dsync::Token case_token(const std::string& id, double at = 0, std::map<std::string, dsync::Value> attrs = {}) {
  dsync::Token t;
  t.case_id = id;
  t.available_at = at;
  t.attrs = std::move(attrs);
  return t;
}

inline dsync::Token resource_token(const std::string& id) {
  dsync::Token t;
  t.case_id = id;
  return t;
}

inline dsync::Log job_queue() { return dsync::load_log(source_path("data/job_queue.csv")); }

}  // namespace testing
