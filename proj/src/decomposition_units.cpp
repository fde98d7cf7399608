#include "credence/decomposition/units.hpp"

#include "credence/errors.hpp"
#include "credence/text.hpp"

namespace credence {

using nlohmann::json;

std::string to_string(Granularity g) { return g == Granularity::Sentence ? "sent" : "claim"; }

Granularity parse_granularity(const std::string& s) {
  if (s == "sent") return Granularity::Sentence;
  if (s == "claim") return Granularity::Claim;
  throw ConfigError("unknown granularity: " + s + " (expected sent|claim)");
}

std::string make_unit_id(const std::string& source_response, Granularity g, int ordinal) {
  return source_response + "#" + to_string(g) + std::to_string(ordinal);
}

json Unit::to_json() const {
  return json{{"id", id},
              {"text", text},
              {"granularity", to_string(granularity)},
              {"source_response", source_response},
              {"ordinal", ordinal}};
}

Unit Unit::from_json(const json& j) {
  Unit u;
  u.id = j.at("id").get<std::string>();
  u.text = j.at("text").get<std::string>();
  u.granularity = parse_granularity(j.at("granularity").get<std::string>());
  u.source_response = j.at("source_response").get<std::string>();
  u.ordinal = j.at("ordinal").get<int>();
  return u;
}

bool ClaimUnion::contains_normalized(const std::string& normalized_text) const {
  return find_normalized(normalized_text) != nullptr;
}

const Unit* ClaimUnion::find_normalized(const std::string& normalized_text) const {
  for (const auto& c : claims)
    if (normalize_claim(c.text) == normalized_text) return &c;
  return nullptr;
}

}  // namespace credence
