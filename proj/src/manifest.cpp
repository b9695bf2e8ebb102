#include "shatterlab/manifest.hpp"

#include <array>
#include <chrono>
#include <ctime>

#include <openssl/evp.h>

#include "shatterlab/errors.hpp"
#include "shatterlab/version.hpp"

namespace shatterlab {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string config_digest(const nlohmann::json& config) { return sha256_hex(config.dump()); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest RunManifest::make(std::string command, nlohmann::json config, std::uint64_t seed,
                              std::vector<std::string> outputs) {
  RunManifest m;
  m.command = std::move(command);
  m.config_digest = shatterlab::config_digest(config);
  m.config = std::move(config);
  m.seed = seed;
  m.tool_version = kToolVersion;
  m.timestamp = utc_timestamp();
  m.outputs = std::move(outputs);
  return m;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = kManifestSchema;
  j["command"] = command;
  j["config"] = config;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  j["outputs"] = outputs;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key)) throw ParseError("manifest is missing field", std::string("/") + key);
    return j.at(key);
  };
  RunManifest m;
  try {
    if (field("schema").get<std::string>() != kManifestSchema)
      throw ParseError("unsupported manifest schema", "/schema");
    m.command = field("command").get<std::string>();
    m.config = field("config");
    m.config_digest = field("config_digest").get<std::string>();
    m.seed = field("seed").get<std::uint64_t>();
    m.tool_version = field("tool_version").get<std::string>();
    m.timestamp = field("timestamp").get<std::string>();
    m.outputs = field("outputs").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), "");
  }
  if (shatterlab::config_digest(m.config) != m.config_digest)
    throw ParseError("config_digest does not match the serialized config", "/config_digest");
  return m;
}

}  // namespace shatterlab
