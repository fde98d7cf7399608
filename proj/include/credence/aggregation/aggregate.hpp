#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/decomposition/units.hpp"
#include "credence/providers/prompts.hpp"
#include "credence/providers/types.hpp"

namespace credence {

struct ResponseConfidence {
  std::string response_id;
  std::string config_fp;
  // Absent only for the UAD empty-retention outcome.
  std::optional<double> aggregate;
  std::vector<std::string> retained_unit_ids;  // UAD only
  std::optional<double> tau;                   // UAD only

  bool uad() const { return tau.has_value(); }
  nlohmann::json to_json() const;
};

// Arithmetic mean of unit scores. Empty input means the response decomposed
// to nothing, which is an error at this level.
ResponseConfidence aggregate_avg(const std::string& response_id, const std::string& config_fp,
                                 const std::vector<double>& unit_scores);

struct ScoredClaim {
  std::string unit_id;
  double score = 0.0;
};

// Retains claims with score strictly above tau and averages the rest. An
// empty retained set is a reported outcome (absent aggregate), not an error.
ResponseConfidence uad_filter(const std::string& response_id, const std::string& config_fp,
                              const std::vector<ScoredClaim>& claims, double tau);

// Nearest-rank percentile, 0 < q < 100.
double percentile_threshold(std::vector<double> scores, double q);

// Asks the generator to rewrite the retained claims as one response.
std::string reconstruct_response(TextGenerator& generator, const PromptLibrary& prompts,
                                 const std::vector<Unit>& retained_claims);

}  // namespace credence
