#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/providers/cache.hpp"
#include "credence/providers/transport.hpp"
#include "credence/providers/types.hpp"

namespace credence {

enum class ReplayMode { Record, StrictReplay, Live };

ReplayMode parse_replay_mode(const std::string& s);
std::string to_string(ReplayMode mode);

// One provider block from the run config. request_template / response_paths
// default to a chat-completions style wire format per kind when omitted.
struct ProviderEndpoint {
  std::string id;            // stable name, part of every cache key
  std::string kind;          // generation | nli | embedding
  std::string url;           // empty in strict replay
  std::string auth_env_var;  // secrets come from the environment, never the config
  std::string model;
  nlohmann::json request_template;
  nlohmann::json response_paths;
  int parallelism = 8;

  static ProviderEndpoint parse(const std::string& id, const nlohmann::json& block);
};

struct ProviderStats {
  std::atomic<long> logical_calls{0};
  std::atomic<long> cache_hits{0};
  std::atomic<long> retries{0};
  std::shared_ptr<std::atomic<long>> network_ops = std::make_shared<std::atomic<long>>(0);

  nlohmann::json to_json() const;
};

// Minimal json path lookup: dot-separated keys, numeric indices, and '*' to
// map over an array ("choices.*.message.content").
nlohmann::json extract_path(const nlohmann::json& root, const std::string& path);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Shared request machinery: logical request -> cache key -> replay store or
// HTTP roundtrip (3 attempts, exponential backoff from 500 ms on
// transport/5xx errors).
class ProviderClientBase {
 public:
  ProviderClientBase(ProviderEndpoint endpoint, ReplayMode mode, std::shared_ptr<ReplayCache> cache,
                     std::shared_ptr<Transport> transport, std::shared_ptr<ProviderStats> stats,
                     Sleeper sleeper);
  virtual ~ProviderClientBase() = default;

  const ProviderEndpoint& endpoint() const { return endpoint_; }
  ProviderStats& stats() { return *stats_; }

 protected:
  // Returns the decoded body of the payload for `logical`. `wire_body` is the
  // outbound HTTP body builder, only invoked when a network call is needed.
  nlohmann::json roundtrip(const nlohmann::json& logical,
                           const std::function<nlohmann::json()>& wire_body);

  ProviderEndpoint endpoint_;
  ReplayMode mode_;
  std::shared_ptr<ReplayCache> cache_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ProviderStats> stats_;
  Sleeper sleeper_;
  std::unique_ptr<std::counting_semaphore<256>> inflight_;
};

class GenerationClient final : public ProviderClientBase, public TextGenerator {
 public:
  using ProviderClientBase::ProviderClientBase;
  std::vector<std::string> generate(const GenerationRequest& req) override;
};

class NliClient final : public ProviderClientBase, public NliProvider {
 public:
  using ProviderClientBase::ProviderClientBase;
  NliJudgment nli(const std::string& premise, const std::string& hypothesis) override;
};

class EmbeddingClient final : public ProviderClientBase, public Embedder {
 public:
  using ProviderClientBase::ProviderClientBase;
  EmbeddingVector embed(const std::string& text) override;
  std::vector<TokenEmbedding> embed_tokens(const std::string& text) override;
};

struct ProviderSetOptions {
  ReplayMode mode = ReplayMode::StrictReplay;
  std::string replay_store;  // required unless Live
  // Test hook; defaults to HttpTransport. Always wrapped in CountingTransport.
  std::function<std::shared_ptr<Transport>()> transport_factory;
  Sleeper sleeper;                    // defaults to real sleep
  std::function<std::string()> clock; // forwarded to the replay cache
};

// Builds the three clients from the "providers" config object:
//   {"generation": {...}, "nli": {...}, "embedding": {...}}
// Blocks may be omitted; using an absent client throws.
class ProviderSet {
 public:
  ProviderSet(const nlohmann::json& provider_blocks, ProviderSetOptions opts);

  TextGenerator& generation();
  NliProvider& nli();
  Embedder& embedding();

  bool has_generation() const { return generation_ != nullptr; }
  bool has_nli() const { return nli_ != nullptr; }
  bool has_embedding() const { return embedding_ != nullptr; }

  long network_ops() const { return network_ops_->load(); }
  nlohmann::json stats_json() const;
  std::shared_ptr<ReplayCache> cache() { return cache_; }

 private:
  std::shared_ptr<ReplayCache> cache_;
  std::shared_ptr<std::atomic<long>> network_ops_;
  std::unique_ptr<GenerationClient> generation_;
  std::unique_ptr<NliClient> nli_;
  std::unique_ptr<EmbeddingClient> embedding_;
};

}  // namespace credence
