#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace credence {

enum class Granularity { Sentence, Claim };

std::string to_string(Granularity g);           // "sent" | "claim"
Granularity parse_granularity(const std::string& s);

struct Unit {
  std::string id;               // "<source_response>#<sent|claim><ordinal>"
  std::string text;             // trimmed, nonempty
  Granularity granularity = Granularity::Sentence;
  std::string source_response;
  int ordinal = 0;

  nlohmann::json to_json() const;
  static Unit from_json(const nlohmann::json& j);
};

std::string make_unit_id(const std::string& source_response, Granularity g, int ordinal);

struct DecomposedResponse {
  std::string response_id;
  Granularity granularity = Granularity::Sentence;
  std::vector<Unit> units;
};

// Union of unique claims across responses. Uniqueness is by normalize_claim
// (casefold + whitespace collapse + trailing-period strip).
struct ClaimUnion {
  std::vector<Unit> claims;
  std::map<std::string, std::set<std::string>> provenance;  // claim id -> contributing responses

  bool contains_normalized(const std::string& normalized_text) const;
  const Unit* find_normalized(const std::string& normalized_text) const;
};

struct UnitQuestion {
  std::string unit_id;
  std::string text;  // trimmed, ends with '?'
  int ordinal = 1;   // 1-based
};

}  // namespace credence
