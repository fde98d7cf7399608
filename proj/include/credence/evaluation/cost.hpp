#pragma once

#include <string>

#include <json.hpp>

#include "credence/decomposition/units.hpp"
#include "credence/scorers/config.hpp"

namespace credence {

// The six costed scorer configurations (family x granularity).
enum class CostFamily {
  ClaimResponse,
  GraphBased,
  ClaimQa,
  SentenceResponse,
  MatchedSentence,
  SentenceQa
};

std::string to_string(CostFamily f);

// Throws ConfigError for the verbalized family, which has no cost row.
CostFamily cost_family(ScorerFamily family, Granularity granularity);

struct CostEstimate {
  long comparisons = 0;
  long generations = 0;  // beyond generating the original response

  nlohmann::json to_json() const;
};

// Per-prompt semantic comparison and generation counts by scorer family:
//   claim-response:    m*N_claim,        m + UAD + 1
//   graph-based:       m*N_union,        3m + UAD + 1
//   claim-QA:          m_qa*Q*N_claim,   ((1+m_qa)Q + 1)*N_claim + UAD + 1
//   sentence-response: m*N_sent,         m
//   matched-sentence:  m*N_sent^2,       m
//   sentence-QA:       m_qa*Q*N_sent,    ((1+m_qa)Q + 1)*N_sent
CostEstimate cost_model(CostFamily family, int m, int m_qa, int q, long n_claim, long n_sent,
                        long n_union, bool uad);

}  // namespace credence
