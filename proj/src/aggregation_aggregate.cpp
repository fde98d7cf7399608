#include "credence/aggregation/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "credence/errors.hpp"

namespace credence {

using nlohmann::json;

json ResponseConfidence::to_json() const {
  json j{{"response_id", response_id}, {"config_fp", config_fp}};
  j["aggregate"] = aggregate ? json(*aggregate) : json(nullptr);
  if (tau) {
    j["tau"] = *tau;
    j["retained_unit_ids"] = retained_unit_ids;
  }
  return j;
}

ResponseConfidence aggregate_avg(const std::string& response_id, const std::string& config_fp,
                                 const std::vector<double>& unit_scores) {
  if (unit_scores.empty())
    throw Error("aggregate_avg: response " + response_id + " has an empty decomposition");
  ResponseConfidence rc;
  rc.response_id = response_id;
  rc.config_fp = config_fp;
  rc.aggregate = std::accumulate(unit_scores.begin(), unit_scores.end(), 0.0) /
                 static_cast<double>(unit_scores.size());
  return rc;
}

ResponseConfidence uad_filter(const std::string& response_id, const std::string& config_fp,
                              const std::vector<ScoredClaim>& claims, double tau) {
  ResponseConfidence rc;
  rc.response_id = response_id;
  rc.config_fp = config_fp;
  rc.tau = tau;
  double sum = 0.0;
  for (const auto& c : claims) {
    if (c.score > tau) {  // strict: ties at tau are filtered
      rc.retained_unit_ids.push_back(c.unit_id);
      sum += c.score;
    }
  }
  if (!rc.retained_unit_ids.empty())
    rc.aggregate = sum / static_cast<double>(rc.retained_unit_ids.size());
  return rc;
}

double percentile_threshold(std::vector<double> scores, double q) {
  if (scores.empty()) throw Error("percentile_threshold: empty score list");
  if (!(q > 0.0 && q < 100.0)) throw Error("percentile_threshold: q must be in (0,100)");
  std::sort(scores.begin(), scores.end());
  size_t rank = static_cast<size_t>(std::ceil(q / 100.0 * static_cast<double>(scores.size())));
  if (rank == 0) rank = 1;
  return scores[rank - 1];
}

std::string reconstruct_response(TextGenerator& generator, const PromptLibrary& prompts,
                                 const std::vector<Unit>& retained_claims) {
  if (retained_claims.empty())
    throw Error("reconstruct_response: retained claim set is empty; nothing to rewrite");
  std::string listing;
  for (const auto& c : retained_claims) {
    listing += "- ";
    listing += c.text;
    listing += "\n";
  }
  listing.pop_back();
  GenerationRequest req;
  req.prompt = prompts.render(template_ids::kResponseReconstruction, {{"claims", listing}});
  req.n_samples = 1;
  req.temperature = 0.0;
  return generator.generate(req).at(0);
}

}  // namespace credence
