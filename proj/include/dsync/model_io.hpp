#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "dsync/net.hpp"

namespace dsync {

inline constexpr const char* kModelFormat = "dsync-net/1";

/// Parses a model document. Throws ValidationError on schema problems; the
/// net itself is not validated here (see validate_net).
Net net_from_json(const nlohmann::json& doc);
nlohmann::ordered_json net_to_json(const Net& net);

Net load_net(const std::filesystem::path& path);
void save_net(const Net& net, const std::filesystem::path& path);

nlohmann::ordered_json delay_to_json(const DelaySpec& d);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Thrown when a file cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsync
