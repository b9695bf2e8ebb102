#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "shatterlab/experiments.hpp"

namespace shatterlab::campaign {

inline constexpr const char* kConfigSchema = "shatterlab.experiment/1";

using Config = std::variant<TailCampaignConfig, ShatterCampaignConfig, AreaCampaignConfig, CouponConfig>;

/// One parsed experiment document.
struct Campaign {
  std::string kind;  // "tail", "shatter", "area" or "coupon"
  std::string name;  // output file prefix
  Config config;
  nlohmann::json document;  // the input, used for echo and digest
};

/// Strict parse: unknown keys, wrong types and missing fields raise ParseError
/// whose location is the JSON pointer of the offending field. Domain
/// violations surface later from validate().
Campaign parse_campaign(const nlohmann::json& doc);
Campaign parse_campaign_text(std::string_view text, const std::string& source = "<config>");

/// Throws DomainError if the parsed values violate a precondition.
void validate(const Campaign& c);

struct Plan {
  std::int64_t trials;
  std::int64_t matvecs;  // a dense factorization of size n counts as n matvecs
};
Plan plan(const Campaign& c);

struct OutputFile {
  std::string name;  // file name, no directory
  std::string content;
};

/// Runs the campaign and renders every result file. Contents depend only on
/// the document, never on thread count or wall clock.
std::vector<OutputFile> run(const Campaign& c);

/// JSON number, or the string "inf"/"-inf"/"nan" for non-finite values.
nlohmann::json json_number(double x);

/// {"tool", "version", "prng"}.
nlohmann::json environment_stamp();

}  // namespace shatterlab::campaign
