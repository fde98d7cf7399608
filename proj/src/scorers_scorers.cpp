#include "credence/scorers/scorers.hpp"

#include <algorithm>
#include <numeric>

#include "credence/errors.hpp"
#include "credence/text.hpp"

namespace credence {

using nlohmann::json;

json ScoreRecord::to_json() const {
  return json{{"unit_id", unit_id},
              {"family", credence::to_string(family)},
              {"granularity", credence::to_string(granularity)},
              {"eta", credence::to_string(signal)},
              {"score", score},
              {"evidence", evidence}};
}

ScoreRecord ScoreRecord::from_json(const json& j) {
  ScoreRecord r;
  r.unit_id = j.at("unit_id").get<std::string>();
  r.family = parse_scorer_family(j.at("family").get<std::string>());
  r.granularity = parse_granularity(j.at("granularity").get<std::string>());
  r.signal = parse_score_signal(j.at("eta").get<std::string>());
  r.score = j.at("score").get<double>();
  if (j.contains("evidence")) r.evidence = j.at("evidence").get<std::vector<double>>();
  return r;
}

EtaEvaluator::EtaEvaluator(NliProvider* nli, Embedder* embedder,
                           std::atomic<long>* comparison_counter)
    : nli_(nli), embedder_(embedder), counter_(comparison_counter) {}

long EtaEvaluator::comparisons() const { return counter_ ? counter_->load() : 0; }

const EmbeddingVector& EtaEvaluator::cached_embedding(const std::string& text) {
  std::lock_guard<std::mutex> lock(memo_mu_);
  auto it = embedding_memo_.find(text);
  if (it == embedding_memo_.end()) {
    if (!embedder_) throw Error("no embedding provider available for cosine scoring");
    it = embedding_memo_.emplace(text, embedder_->embed(text)).first;
  }
  return it->second;
}

const std::vector<TokenEmbedding>& EtaEvaluator::cached_tokens(const std::string& text) {
  std::lock_guard<std::mutex> lock(memo_mu_);
  auto it = token_memo_.find(text);
  if (it == token_memo_.end()) {
    if (!embedder_) throw Error("no embedding provider available for bert_f1 scoring");
    it = token_memo_.emplace(text, embedder_->embed_tokens(text)).first;
  }
  return it->second;
}

double EtaEvaluator::value(ConsistencyKind kind, const std::string& a, const std::string& b) {
  if (counter_) counter_->fetch_add(1);
  switch (kind) {
    case ConsistencyKind::Entailment:
    case ConsistencyKind::NonContradiction:
    case ConsistencyKind::ContrastedEntailment:
      if (!nli_) throw Error("no NLI provider available for " + credence::to_string(kind));
      return nli_consistency(kind, nli_->nli(a, b));
    case ConsistencyKind::NormalizedCosine:
      return normalized_cosine(cached_embedding(a), cached_embedding(b));
    case ConsistencyKind::BertF1:
      return bert_f1(cached_tokens(a), cached_tokens(b));
    case ConsistencyKind::ExactMatch:
      return exact_match(a, b);
  }
  throw Error("unreachable consistency kind");
}

namespace {

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Clustering calls are semantic comparisons too; route them through the
// evaluator's counter.
class CountedNli final : public NliProvider {
 public:
  CountedNli(NliProvider& inner, std::atomic<long>* counter) : inner_(inner), counter_(counter) {}
  NliJudgment nli(const std::string& premise, const std::string& hypothesis) override {
    if (counter_) counter_->fetch_add(1);
    return inner_.nli(premise, hypothesis);
  }

 private:
  NliProvider& inner_;
  std::atomic<long>* counter_;
};

std::string failed_list(const std::vector<size_t>& failed, const std::string& first_error) {
  std::string msg = "scoring failed for candidate indices [";
  for (size_t i = 0; i < failed.size(); ++i) {
    if (i) msg += ",";
    msg += std::to_string(failed[i]);
  }
  msg += "]; first error: " + first_error;
  return msg;
}

}  // namespace

ScoreRecord unit_response_score(const Unit& unit, const std::vector<std::string>& candidates,
                                ConsistencyKind kind, EtaEvaluator& eta,
                                const std::string& config_fp) {
  if (candidates.empty()) throw Error("unit_response_score: needs at least one candidate");
  if (!is_nli_kind(kind))
    throw ConfigError("unit_response_score admits NLI consistency kinds only, got " +
                      to_string(kind));
  ScoreRecord rec;
  rec.unit_id = unit.id;
  rec.config_fp = config_fp;
  rec.family = ScorerFamily::UnitResponse;
  rec.granularity = unit.granularity;
  rec.signal = parse_score_signal(to_string(kind));

  std::vector<size_t> failed;
  std::string first_error;
  for (size_t j = 0; j < candidates.size(); ++j) {
    try {
      rec.evidence.push_back(eta.value(kind, candidates[j], unit.text));
    } catch (const Error& e) {
      failed.push_back(j);
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!failed.empty()) throw ProviderError(failed_list(failed, first_error), false);
  rec.score = mean(rec.evidence);
  return rec;
}

ScoreRecord matched_unit_score(const Unit& unit,
                               const std::vector<DecomposedResponse>& decomposed_candidates,
                               ConsistencyKind kind, EtaEvaluator& eta,
                               const std::string& config_fp) {
  if (decomposed_candidates.empty())
    throw Error("matched_unit_score: needs at least one decomposed candidate");
  ScoreRecord rec;
  rec.unit_id = unit.id;
  rec.config_fp = config_fp;
  rec.family = ScorerFamily::MatchedUnit;
  rec.granularity = unit.granularity;
  rec.signal = parse_score_signal(to_string(kind));

  std::vector<size_t> failed;
  std::string first_error;
  for (size_t j = 0; j < decomposed_candidates.size(); ++j) {
    const auto& cand = decomposed_candidates[j];
    if (cand.granularity != unit.granularity)
      throw Error("matched_unit_score: candidate " + cand.response_id +
                  " decomposed at a different granularity than the unit");
    try {
      double best = 0.0;  // empty decomposition contributes 0
      for (const auto& cu : cand.units) best = std::max(best, eta.value(kind, cu.text, unit.text));
      rec.evidence.push_back(best);
    } catch (const Error& e) {
      failed.push_back(j);
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!failed.empty()) throw ProviderError(failed_list(failed, first_error), false);
  rec.score = mean(rec.evidence);
  return rec;
}

ScoreRecord unit_qa_score(const Unit& unit, const std::vector<QuestionAnswers>& per_question,
                          ScoreSignal signal, EtaEvaluator& eta, double entail_threshold,
                          const std::string& config_fp) {
  if (per_question.empty()) throw Error("unit_qa_score: no question answers for unit " + unit.id);
  ScoreRecord rec;
  rec.unit_id = unit.id;
  rec.config_fp = config_fp;
  rec.family = ScorerFamily::UnitQa;
  rec.granularity = unit.granularity;
  rec.signal = signal;

  std::vector<double> question_scores;
  for (size_t qi = 0; qi < per_question.size(); ++qi) {
    const auto& qa = per_question[qi];
    if (qa.original.empty() || qa.sampled.empty())
      throw Error("unit_qa_score: missing answers for question " + std::to_string(qi + 1) +
                  " of unit " + unit.id);
    if (signal == ScoreSignal::Negentropy) {
      if (!eta.nli_provider()) throw Error("negentropy scoring needs an NLI provider");
      std::vector<std::string> all;
      all.reserve(qa.sampled.size() + 1);
      all.push_back(qa.original);
      all.insert(all.end(), qa.sampled.begin(), qa.sampled.end());
      CountedNli counted(*eta.nli_provider(), eta.comparison_counter());
      auto clusters = cluster_bidirectional(counted, all, entail_threshold);
      double score = semantic_negentropy(clusters);
      question_scores.push_back(score);
      rec.evidence.push_back(score);
    } else {
      ConsistencyKind kind = to_consistency_kind(signal);
      std::vector<double> vals;
      vals.reserve(qa.sampled.size());
      for (const auto& ans : qa.sampled) {
        double v = eta.value(kind, qa.original, ans);
        vals.push_back(v);
        rec.evidence.push_back(v);
      }
      question_scores.push_back(mean(vals));
    }
  }
  rec.score = mean(question_scores);
  return rec;
}

std::vector<ScoreRecord> graph_based_scores(const EntailmentGraph& graph,
                                            const CentralityReport& report, ScoreSignal metric,
                                            const std::string& config_fp) {
  if (!is_graph_metric(metric))
    throw ConfigError("graph_based_scores: " + to_string(metric) + " is not a centrality metric");
  if (report.per_claim.size() != graph.claim_nodes.size())
    throw Error("graph_based_scores: report does not match graph");

  std::vector<int> degree(graph.claim_nodes.size(), 0);
  for (const auto& [c, r] : graph.edges) ++degree[static_cast<size_t>(c)];

  std::vector<ScoreRecord> out;
  out.reserve(graph.claim_nodes.size());
  for (size_t i = 0; i < graph.claim_nodes.size(); ++i) {
    const auto& scores = report.per_claim[i];
    ScoreRecord rec;
    rec.unit_id = graph.claim_nodes[i].id;
    rec.config_fp = config_fp;
    rec.family = ScorerFamily::GraphBased;
    rec.granularity = Granularity::Claim;
    rec.signal = metric;
    switch (metric) {
      case ScoreSignal::Betweenness: rec.score = scores.betweenness; break;
      case ScoreSignal::Closeness: rec.score = scores.closeness; break;
      case ScoreSignal::Harmonic: rec.score = scores.harmonic; break;
      case ScoreSignal::Laplacian: rec.score = scores.laplacian; break;
      case ScoreSignal::Pagerank: rec.score = scores.pagerank; break;
      default: break;
    }
    rec.evidence = {static_cast<double>(degree[i]),
                    scores.disconnected ? 0.0 : 1.0};
    out.push_back(std::move(rec));
  }
  return out;
}

std::optional<double> parse_confidence_phrase(const std::string& response) {
  static const std::vector<std::pair<const char*, double>> buckets = {
      {"no chance", 0.1},        {"little chance", 0.3}, {"less than even", 0.5},
      {"fairly possible", 0.7},  {"very good chance", 0.9}, {"almost certain", 1.0}};
  std::string t = trim(response);
  for (const auto& [phrase, value] : buckets)
    if (starts_with_icase(t, phrase)) return value;
  return std::nullopt;
}

ScoreRecord verbalized_confidence(TextGenerator& generator, const PromptLibrary& prompts,
                                  const Unit& unit, const std::string& original_question,
                                  const std::string& config_fp) {
  GenerationRequest req;
  req.prompt = prompts.render(template_ids::kVerbalizedConfidence,
                              {{"original_question", original_question}, {"claim", unit.text}});
  req.n_samples = 1;
  req.temperature = 0.0;

  std::string raw = generator.generate(req).at(0);
  auto parsed = parse_confidence_phrase(raw);
  if (!parsed) {
    GenerationRequest retry = req;
    retry.tag = "retry:1";
    raw = generator.generate(retry).at(0);
    parsed = parse_confidence_phrase(raw);
  }
  if (!parsed)
    throw FormatError("verbalized confidence for unit " + unit.id +
                          " produced no recognizable phrase after retry",
                      raw);

  ScoreRecord rec;
  rec.unit_id = unit.id;
  rec.config_fp = config_fp;
  rec.family = ScorerFamily::Verbalized;
  rec.granularity = unit.granularity;
  rec.signal = ScoreSignal::Verbalized;
  rec.score = *parsed;
  rec.evidence = {*parsed};
  return rec;
}

}  // namespace credence
