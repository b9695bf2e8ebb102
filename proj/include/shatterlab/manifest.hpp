#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace shatterlab {

inline constexpr const char* kManifestSchema = "shatterlab.manifest/1";

/// Sidecar written next to every output. `config` holds everything needed to
/// re-run `command`; config_digest is the SHA-256 of config.dump().
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string timestamp;             // ISO-8601 UTC
  std::vector<std::string> outputs;  // file names relative to the manifest

  static RunManifest make(std::string command, nlohmann::json config, std::uint64_t seed,
                          std::vector<std::string> outputs);

  nlohmann::json to_json() const;
  /// Throws ParseError on a malformed manifest or a digest mismatch.
  static RunManifest from_json(const nlohmann::json& j);
};

std::string sha256_hex(std::string_view data);
std::string config_digest(const nlohmann::json& config);
std::string utc_timestamp();

}  // namespace shatterlab
