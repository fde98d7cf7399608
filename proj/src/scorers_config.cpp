#include "credence/scorers/config.hpp"

#include "credence/errors.hpp"
#include "credence/hashing.hpp"

namespace credence {

using nlohmann::json;

std::string to_string(ScorerFamily f) {
  switch (f) {
    case ScorerFamily::UnitResponse: return "unit_response";
    case ScorerFamily::MatchedUnit: return "matched_unit";
    case ScorerFamily::UnitQa: return "unit_qa";
    case ScorerFamily::GraphBased: return "graph_based";
    case ScorerFamily::Verbalized: return "verbalized";
  }
  return "?";
}

ScorerFamily parse_scorer_family(const std::string& s) {
  if (s == "unit_response") return ScorerFamily::UnitResponse;
  if (s == "matched_unit") return ScorerFamily::MatchedUnit;
  if (s == "unit_qa") return ScorerFamily::UnitQa;
  if (s == "graph_based") return ScorerFamily::GraphBased;
  if (s == "verbalized") return ScorerFamily::Verbalized;
  throw ConfigError("unknown scorer family: " + s);
}

std::string to_string(ScoreSignal s) {
  switch (s) {
    case ScoreSignal::Entailment: return "entailment";
    case ScoreSignal::NonContradiction: return "non_contradiction";
    case ScoreSignal::ContrastedEntailment: return "contrasted_entailment";
    case ScoreSignal::NormalizedCosine: return "normalized_cosine";
    case ScoreSignal::BertF1: return "bert_f1";
    case ScoreSignal::ExactMatch: return "exact_match";
    case ScoreSignal::Negentropy: return "negentropy";
    case ScoreSignal::Betweenness: return "betweenness";
    case ScoreSignal::Closeness: return "closeness";
    case ScoreSignal::Harmonic: return "harmonic";
    case ScoreSignal::Laplacian: return "laplacian";
    case ScoreSignal::Pagerank: return "pagerank";
    case ScoreSignal::Verbalized: return "verbalized";
  }
  return "?";
}

ScoreSignal parse_score_signal(const std::string& s) {
  static const std::map<std::string, ScoreSignal> lookup = {
      {"entailment", ScoreSignal::Entailment},
      {"non_contradiction", ScoreSignal::NonContradiction},
      {"contrasted_entailment", ScoreSignal::ContrastedEntailment},
      {"normalized_cosine", ScoreSignal::NormalizedCosine},
      {"bert_f1", ScoreSignal::BertF1},
      {"exact_match", ScoreSignal::ExactMatch},
      {"negentropy", ScoreSignal::Negentropy},
      {"betweenness", ScoreSignal::Betweenness},
      {"closeness", ScoreSignal::Closeness},
      {"harmonic", ScoreSignal::Harmonic},
      {"laplacian", ScoreSignal::Laplacian},
      {"pagerank", ScoreSignal::Pagerank},
      {"verbalized", ScoreSignal::Verbalized},
  };
  auto it = lookup.find(s);
  if (it == lookup.end()) throw ConfigError("unknown score signal: " + s);
  return it->second;
}

bool is_graph_metric(ScoreSignal s) {
  switch (s) {
    case ScoreSignal::Betweenness:
    case ScoreSignal::Closeness:
    case ScoreSignal::Harmonic:
    case ScoreSignal::Laplacian:
    case ScoreSignal::Pagerank:
      return true;
    default:
      return false;
  }
}

bool is_consistency_signal(ScoreSignal s) {
  switch (s) {
    case ScoreSignal::Entailment:
    case ScoreSignal::NonContradiction:
    case ScoreSignal::ContrastedEntailment:
    case ScoreSignal::NormalizedCosine:
    case ScoreSignal::BertF1:
    case ScoreSignal::ExactMatch:
      return true;
    default:
      return false;
  }
}

ConsistencyKind to_consistency_kind(ScoreSignal s) {
  switch (s) {
    case ScoreSignal::Entailment: return ConsistencyKind::Entailment;
    case ScoreSignal::NonContradiction: return ConsistencyKind::NonContradiction;
    case ScoreSignal::ContrastedEntailment: return ConsistencyKind::ContrastedEntailment;
    case ScoreSignal::NormalizedCosine: return ConsistencyKind::NormalizedCosine;
    case ScoreSignal::BertF1: return ConsistencyKind::BertF1;
    case ScoreSignal::ExactMatch: return ConsistencyKind::ExactMatch;
    default:
      throw Error(to_string(s) + " is not a pairwise consistency signal");
  }
}

std::string ScorerConfig::name() const {
  return to_string(family) + "/" + to_string(granularity) + "/" + to_string(signal);
}

json ScorerConfig::to_json() const {
  json j{{"family", to_string(family)},
         {"granularity", to_string(granularity)},
         {"eta", to_string(signal)}};
  if (m > 0) j["m"] = m;
  if (m_qa > 0) j["m_qa"] = m_qa;
  if (q > 0) j["q"] = q;
  return j;
}

std::string ScorerConfig::fingerprint() const { return credence::fingerprint(to_json()); }

ScorerConfig ScorerConfig::parse(const json& j) {
  if (!j.is_object()) throw ConfigError("scorer config must be an object");
  ScorerConfig c;
  c.family = parse_scorer_family(j.value("family", ""));
  c.granularity = parse_granularity(j.value("granularity", ""));
  if (c.family == ScorerFamily::Verbalized)
    c.signal = ScoreSignal::Verbalized;
  else
    c.signal = parse_score_signal(j.value("eta", ""));
  c.m = j.value("m", 0);
  c.m_qa = j.value("m_qa", 0);
  c.q = j.value("q", 0);
  validate_admissible(c);
  return c;
}

void validate_admissible(const ScorerConfig& c) {
  auto reject = [&](const std::string& why) {
    throw ConfigError("inadmissible scorer " + c.name() + ": " + why);
  };
  switch (c.family) {
    case ScorerFamily::UnitResponse:
      if (!is_consistency_signal(c.signal) || !is_nli_kind(to_consistency_kind(c.signal)))
        reject("unit-response scoring compares short units to full responses and only admits NLI "
               "consistency functions");
      break;
    case ScorerFamily::MatchedUnit:
      if (c.granularity != Granularity::Sentence)
        reject("matched-unit scoring runs at sentence granularity only; matched-claim comparison "
               "costs are prohibitive");
      if (!is_consistency_signal(c.signal) || c.signal == ScoreSignal::ExactMatch)
        reject("matched-unit scoring admits NLI kinds, normalized_cosine, and bert_f1");
      break;
    case ScorerFamily::UnitQa:
      if (c.signal != ScoreSignal::NonContradiction && c.signal != ScoreSignal::NormalizedCosine &&
          c.signal != ScoreSignal::BertF1 && c.signal != ScoreSignal::ExactMatch &&
          c.signal != ScoreSignal::Negentropy)
        reject("unit-QA scoring admits non_contradiction, normalized_cosine, bert_f1, "
               "exact_match, or negentropy");
      break;
    case ScorerFamily::GraphBased:
      if (c.granularity != Granularity::Claim)
        reject("graph-based scorers operate only at the claim level");
      if (!is_graph_metric(c.signal))
        reject("graph-based scoring requires a centrality metric signal");
      break;
    case ScorerFamily::Verbalized:
      if (c.signal != ScoreSignal::Verbalized) reject("verbalized scorers take no eta");
      break;
  }
}

}  // namespace credence
