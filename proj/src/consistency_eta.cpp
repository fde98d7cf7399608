#include "credence/consistency/eta.hpp"

#include <algorithm>
#include <cmath>

#include "credence/errors.hpp"
#include "credence/text.hpp"

namespace credence {

std::string to_string(ConsistencyKind k) {
  switch (k) {
    case ConsistencyKind::Entailment: return "entailment";
    case ConsistencyKind::NonContradiction: return "non_contradiction";
    case ConsistencyKind::ContrastedEntailment: return "contrasted_entailment";
    case ConsistencyKind::NormalizedCosine: return "normalized_cosine";
    case ConsistencyKind::BertF1: return "bert_f1";
    case ConsistencyKind::ExactMatch: return "exact_match";
  }
  return "?";
}

ConsistencyKind parse_consistency_kind(const std::string& s) {
  if (s == "entailment") return ConsistencyKind::Entailment;
  if (s == "non_contradiction") return ConsistencyKind::NonContradiction;
  if (s == "contrasted_entailment") return ConsistencyKind::ContrastedEntailment;
  if (s == "normalized_cosine") return ConsistencyKind::NormalizedCosine;
  if (s == "bert_f1") return ConsistencyKind::BertF1;
  if (s == "exact_match") return ConsistencyKind::ExactMatch;
  throw ConfigError("unknown consistency function: " + s);
}

bool is_nli_kind(ConsistencyKind k) {
  return k == ConsistencyKind::Entailment || k == ConsistencyKind::NonContradiction ||
         k == ConsistencyKind::ContrastedEntailment;
}

double nli_consistency(ConsistencyKind kind, const NliJudgment& j) {
  if (!j.valid()) throw Error("nli_consistency: invalid judgment");
  switch (kind) {
    case ConsistencyKind::Entailment:
      return j.p_entail;
    case ConsistencyKind::NonContradiction:
      return 1.0 - j.p_contra;
    case ConsistencyKind::ContrastedEntailment: {
      double denom = j.p_entail + j.p_contra;
      if (denom <= 0.0) return 0.5;
      return j.p_entail / denom;
    }
    default:
      throw Error("nli_consistency: " + to_string(kind) + " is not an NLI kind");
  }
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.values.size() != v.values.size())
    throw DegenerateInputError("cosine: dimension mismatch (" + std::to_string(u.values.size()) +
                               " vs " + std::to_string(v.values.size()) + ")");
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DegenerateInputError("cosine: zero-norm vector");
  double c = dot(u.values, v.values) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

double normalized_cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  return (cosine(u, v) + 1.0) / 2.0;
}

double bert_f1(std::span<const TokenEmbedding> a, std::span<const TokenEmbedding> b) {
  if (a.empty() || b.empty()) throw DegenerateInputError("bert_f1: empty token list");
  auto mean_best = [](std::span<const TokenEmbedding> from, std::span<const TokenEmbedding> to) {
    double sum = 0.0;
    for (const auto& ta : from) {
      double best = -1.0;
      for (const auto& tb : to) best = std::max(best, cosine(ta.vec, tb.vec));
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  double recall = mean_best(a, b);
  double precision = mean_best(b, a);
  double denom = precision + recall;
  // Raw cosines can be negative; the harmonic mean is only meaningful when
  // the denominator is, so a vanishing or sign-crossed denominator pins the
  // raw F1 at 0 and the result is clamped into cosine range before
  // normalizing.
  double f1 = std::fabs(denom) < 1e-12 ? 0.0 : 2.0 * precision * recall / denom;
  f1 = std::clamp(f1, -1.0, 1.0);
  return (f1 + 1.0) / 2.0;
}

double exact_match(const std::string& a, const std::string& b) {
  return normalize_for_match(a) == normalize_for_match(b) ? 1.0 : 0.0;
}

}  // namespace credence
