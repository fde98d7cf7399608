#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/errors.hpp"

namespace credence {

struct RoleMessage {
  std::string role;
  std::string text;
};

struct GenerationRequest {
  std::string prompt;
  int n_samples = 1;
  double temperature = 1.0;
  std::vector<RoleMessage> role_messages;  // optional prefix turns (system etc.)
  std::string tag;                         // cache partition label (e.g. retries)

  void validate() const {
    if (n_samples < 1) throw Error("GenerationRequest: n_samples must be >= 1");
    if (!(temperature >= 0.0)) throw Error("GenerationRequest: temperature must be >= 0");
  }

  nlohmann::json logical() const;  // canonical request body used for cache keys
};

struct NliJudgment {
  double p_entail = 0.0;
  double p_contra = 0.0;
  double p_neutral = 0.0;

  static NliJudgment make(double e, double c, double n);
  bool valid() const {
    auto in01 = [](double x) { return x >= 0.0 && x <= 1.0 && std::isfinite(x); };
    return in01(p_entail) && in01(p_contra) && in01(p_neutral) &&
           std::fabs(p_entail + p_contra + p_neutral - 1.0) <= 1e-6;
  }
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct TokenEmbedding {
  std::string token;
  EmbeddingVector vec;
};

// Provider protocol. Scoring and decomposition code depends on these
// interfaces only; the HTTP/replay clients and the test mocks both implement
// them.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::vector<std::string> generate(const GenerationRequest& req) = 0;
};

class NliProvider {
 public:
  virtual ~NliProvider() = default;
  // Order-sensitive: premise first, hypothesis second.
  virtual NliJudgment nli(const std::string& premise, const std::string& hypothesis) = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::vector<TokenEmbedding> embed_tokens(const std::string& text) = 0;
};

}  // namespace credence
