#include "credence/evaluation/cost.hpp"

#include "credence/errors.hpp"

namespace credence {

using nlohmann::json;

std::string to_string(CostFamily f) {
  switch (f) {
    case CostFamily::ClaimResponse: return "claim_response";
    case CostFamily::GraphBased: return "graph_based";
    case CostFamily::ClaimQa: return "claim_qa";
    case CostFamily::SentenceResponse: return "sentence_response";
    case CostFamily::MatchedSentence: return "matched_sentence";
    case CostFamily::SentenceQa: return "sentence_qa";
  }
  return "?";
}

CostFamily cost_family(ScorerFamily family, Granularity granularity) {
  const bool claim = granularity == Granularity::Claim;
  switch (family) {
    case ScorerFamily::UnitResponse:
      return claim ? CostFamily::ClaimResponse : CostFamily::SentenceResponse;
    case ScorerFamily::MatchedUnit:
      return CostFamily::MatchedSentence;
    case ScorerFamily::UnitQa:
      return claim ? CostFamily::ClaimQa : CostFamily::SentenceQa;
    case ScorerFamily::GraphBased:
      return CostFamily::GraphBased;
    case ScorerFamily::Verbalized:
      throw ConfigError("verbalized scorers have no cost-model row");
  }
  throw ConfigError("unknown scorer family");
}

json CostEstimate::to_json() const {
  return json{{"comparisons", comparisons}, {"generations", generations}};
}

CostEstimate cost_model(CostFamily family, int m, int m_qa, int q, long n_claim, long n_sent,
                        long n_union, bool uad) {
  if (m < 0 || m_qa < 0 || q < 0 || n_claim < 0 || n_sent < 0 || n_union < 0)
    throw Error("cost_model: counts must be nonnegative");
  const long uad_term = uad ? 1 : 0;
  switch (family) {
    case CostFamily::ClaimResponse:
      return {m * n_claim, m + uad_term + 1};
    case CostFamily::GraphBased:
      return {m * n_union, 3L * m + uad_term + 1};
    case CostFamily::ClaimQa:
      return {static_cast<long>(m_qa) * q * n_claim,
              ((1L + m_qa) * q + 1) * n_claim + uad_term + 1};
    case CostFamily::SentenceResponse:
      return {m * n_sent, m};
    case CostFamily::MatchedSentence:
      return {m * n_sent * n_sent, m};
    case CostFamily::SentenceQa:
      return {static_cast<long>(m_qa) * q * n_sent, ((1L + m_qa) * q + 1) * n_sent};
  }
  throw Error("cost_model: unknown family");
}

}  // namespace credence
