#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/consistency/clusters.hpp"
#include "credence/consistency/eta.hpp"
#include "credence/decomposition/units.hpp"
#include "credence/graph/centrality.hpp"
#include "credence/providers/prompts.hpp"
#include "credence/providers/types.hpp"
#include "credence/scorers/config.hpp"

namespace credence {

struct ScoreRecord {
  std::string unit_id;
  std::string config_fp;
  ScorerFamily family = ScorerFamily::UnitResponse;
  Granularity granularity = Granularity::Claim;
  ScoreSignal signal = ScoreSignal::Entailment;
  double score = 0.0;
  std::vector<double> evidence;  // per-pair eta values or metric inputs

  nlohmann::json to_json() const;
  static ScoreRecord from_json(const nlohmann::json& j);
};

// Single choke point for pairwise consistency evaluation. Every value()
// call counts as one semantic comparison; embeddings are memoized per text so
// repeated pairs do not multiply embedding traffic.
class EtaEvaluator {
 public:
  EtaEvaluator(NliProvider* nli, Embedder* embedder, std::atomic<long>* comparison_counter);

  // a = sampled/candidate text (NLI premise), b = original unit text.
  double value(ConsistencyKind kind, const std::string& a, const std::string& b);
  long comparisons() const;

  NliProvider* nli_provider() { return nli_; }
  std::atomic<long>* comparison_counter() { return counter_; }

 private:
  const EmbeddingVector& cached_embedding(const std::string& text);
  const std::vector<TokenEmbedding>& cached_tokens(const std::string& text);

  NliProvider* nli_;
  Embedder* embedder_;
  std::atomic<long>* counter_;
  std::mutex memo_mu_;
  std::map<std::string, EmbeddingVector> embedding_memo_;
  std::map<std::string, std::vector<TokenEmbedding>> token_memo_;
};

// Mean over candidates of eta(candidate, unit). NLI-only family.
ScoreRecord unit_response_score(const Unit& unit, const std::vector<std::string>& candidates,
                                ConsistencyKind kind, EtaEvaluator& eta,
                                const std::string& config_fp = "");

// Per candidate, max over that candidate's units; then mean over candidates.
// A candidate with an empty decomposition contributes 0.
ScoreRecord matched_unit_score(const Unit& unit,
                               const std::vector<DecomposedResponse>& decomposed_candidates,
                               ConsistencyKind kind, EtaEvaluator& eta,
                               const std::string& config_fp = "");

struct QuestionAnswers {
  std::string original;             // answer generated for the original pass
  std::vector<std::string> sampled; // m_qa sampled answers
};

// Per question: mean over sampled answers of eta(original, sampled), or
// negentropy over clusters of all (1 + m_qa) answers; then an unweighted mean
// across questions.
ScoreRecord unit_qa_score(const Unit& unit, const std::vector<QuestionAnswers>& per_question,
                          ScoreSignal signal, EtaEvaluator& eta, double entail_threshold = 0.5,
                          const std::string& config_fp = "");

// One record per union claim for the requested centrality metric.
std::vector<ScoreRecord> graph_based_scores(const EntailmentGraph& graph,
                                            const CentralityReport& report, ScoreSignal metric,
                                            const std::string& config_fp = "");

// Maps the model's confidence phrase to a numeric anchor.
// Bucket upper-mid anchors for the 20%-wide ranges; "Almost certain" is 1.0.
std::optional<double> parse_confidence_phrase(const std::string& response);

ScoreRecord verbalized_confidence(TextGenerator& generator, const PromptLibrary& prompts,
                                  const Unit& unit, const std::string& original_question,
                                  const std::string& config_fp = "");

}  // namespace credence
