#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "credence/consistency/eta.hpp"
#include "credence/decomposition/units.hpp"

namespace credence {

enum class ScorerFamily { UnitResponse, MatchedUnit, UnitQa, GraphBased, Verbalized };

// The per-unit scoring signal: a pairwise consistency function, negentropy
// over answer clusters, one of the graph centrality metrics, or the
// verbalized-confidence phrase mapping.
enum class ScoreSignal {
  Entailment,
  NonContradiction,
  ContrastedEntailment,
  NormalizedCosine,
  BertF1,
  ExactMatch,
  Negentropy,
  Betweenness,
  Closeness,
  Harmonic,
  Laplacian,
  Pagerank,
  Verbalized
};

std::string to_string(ScorerFamily f);
ScorerFamily parse_scorer_family(const std::string& s);
std::string to_string(ScoreSignal s);
ScoreSignal parse_score_signal(const std::string& s);

bool is_graph_metric(ScoreSignal s);
bool is_consistency_signal(ScoreSignal s);
ConsistencyKind to_consistency_kind(ScoreSignal s);  // consistency signals only

struct ScorerConfig {
  ScorerFamily family = ScorerFamily::UnitResponse;
  Granularity granularity = Granularity::Claim;
  ScoreSignal signal = ScoreSignal::Entailment;
  // 0 means "inherit the run-level value".
  int m = 0;
  int m_qa = 0;
  int q = 0;

  std::string name() const;         // "unit_response/claim/entailment"
  std::string fingerprint() const;
  nlohmann::json to_json() const;

  // Parses and enforces the admissibility matrix; inadmissible combinations
  // raise ConfigError before any work happens.
  static ScorerConfig parse(const nlohmann::json& j);
};

// Which (family, granularity, signal) combinations are meaningful:
//   unit_response: NLI signals only, either granularity
//   matched_unit:  NLI signals + cosine + bert_f1, sentences only
//   unit_qa:       non_contradiction/cosine/bert_f1/exact_match/negentropy
//   graph_based:   centrality metrics, claims only
//   verbalized:    the verbalized signal, either granularity
void validate_admissible(const ScorerConfig& config);

}  // namespace credence
