#pragma once

#include <span>
#include <string>

#include "credence/providers/types.hpp"

namespace credence {

// Pairwise semantic consistency measures, all mapping into [0,1].
enum class ConsistencyKind {
  Entailment,             // p_e
  NonContradiction,       // 1 - p_c
  ContrastedEntailment,   // p_e / (p_e + p_c)
  NormalizedCosine,       // (cos + 1) / 2
  BertF1,                 // matched-token cosine F1, normalized like cosine
  ExactMatch              // 1 iff normalized strings equal
};

std::string to_string(ConsistencyKind k);
ConsistencyKind parse_consistency_kind(const std::string& s);
bool is_nli_kind(ConsistencyKind k);

// NLI-based kinds only. ContrastedEntailment with p_e + p_c == 0 is defined
// as 0.5 (no signal either way).
double nli_consistency(ConsistencyKind kind, const NliJudgment& j);

double normalized_cosine(const EmbeddingVector& u, const EmbeddingVector& v);

// Greedy max-matching per token, recall over a-tokens, precision over
// b-tokens, harmonic mean, then the cosine-style (x+1)/2 normalization. No
// idf weighting.
double bert_f1(std::span<const TokenEmbedding> a, std::span<const TokenEmbedding> b);

double exact_match(const std::string& a, const std::string& b);

}  // namespace credence
