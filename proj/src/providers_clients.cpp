#include "credence/providers/clients.hpp"

#include <thread>

#include "credence/errors.hpp"
#include "credence/hashing.hpp"

namespace credence {

using nlohmann::json;

ReplayMode parse_replay_mode(const std::string& s) {
  if (s == "record") return ReplayMode::Record;
  if (s == "strict_replay") return ReplayMode::StrictReplay;
  if (s == "live") return ReplayMode::Live;
  throw ConfigError("unknown replay mode: " + s + " (expected record|strict_replay|live)");
}

std::string to_string(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::Record: return "record";
    case ReplayMode::StrictReplay: return "strict_replay";
    case ReplayMode::Live: return "live";
  }
  return "?";
}

namespace {

json default_request_template(const std::string& kind) {
  if (kind == "generation")
    return json{{"model", "{model}"},
                {"n", "{n_samples}"},
                {"temperature", "{temperature}"},
                {"messages", "{messages_json}"}};
  if (kind == "nli")
    return json{{"model", "{model}"}, {"premise", "{premise}"}, {"hypothesis", "{hypothesis}"}};
  return json{{"model", "{model}"}, {"input", "{text}"}, {"mode", "{mode}"}};
}

json default_response_paths(const std::string& kind) {
  if (kind == "generation") return json{{"texts", "choices.*.message.content"}};
  if (kind == "nli")
    return json{{"entailment", "scores.entailment"},
                {"contradiction", "scores.contradiction"},
                {"neutral", "scores.neutral"}};
  return json{{"embedding", "data.0.embedding"},
              {"model", "model"},
              {"tokens", "tokens.*.token"},
              {"token_embeddings", "tokens.*.embedding"}};
}

// Replaces {name} placeholders. String values that consist of exactly one
// placeholder present in `exact` take that JSON value (keeps numbers numbers);
// otherwise placeholders found in `textual` are substituted inside the string.
json substitute(const json& node, const std::map<std::string, json>& exact,
                const std::map<std::string, std::string>& textual) {
  if (node.is_object()) {
    json out = json::object();
    for (auto it = node.begin(); it != node.end(); ++it)
      out[it.key()] = substitute(it.value(), exact, textual);
    return out;
  }
  if (node.is_array()) {
    json out = json::array();
    for (const auto& item : node) out.push_back(substitute(item, exact, textual));
    return out;
  }
  if (!node.is_string()) return node;
  std::string s = node.get<std::string>();
  if (s.size() > 2 && s.front() == '{' && s.back() == '}') {
    auto it = exact.find(s.substr(1, s.size() - 2));
    if (it != exact.end()) return it->second;
  }
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '{') {
      size_t close = s.find('}', i);
      if (close != std::string::npos) {
        auto it = textual.find(s.substr(i + 1, close - i - 1));
        if (it != textual.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

double to_double(const json& v, const std::string& what, const std::string& raw) {
  if (v.is_number()) return v.get<double>();
  throw DecodeError("expected number for " + what, raw);
}

}  // namespace

ProviderEndpoint ProviderEndpoint::parse(const std::string& id, const json& block) {
  if (!block.is_object()) throw ConfigError("provider block " + id + " must be an object");
  ProviderEndpoint ep;
  ep.id = block.value("id", id);
  ep.kind = block.value("kind", id);
  if (ep.kind != "generation" && ep.kind != "nli" && ep.kind != "embedding")
    throw ConfigError("provider " + id + ": unknown kind '" + ep.kind + "'");
  ep.url = block.value("url", "");
  ep.auth_env_var = block.value("auth_env_var", "");
  ep.model = block.value("model", "default");
  ep.request_template = block.contains("request_template") ? block.at("request_template")
                                                           : default_request_template(ep.kind);
  ep.response_paths =
      block.contains("response_paths") ? block.at("response_paths") : default_response_paths(ep.kind);
  ep.parallelism = block.value("parallelism", 8);
  if (ep.parallelism < 1 || ep.parallelism > 256)
    throw ConfigError("provider " + id + ": parallelism must be in [1,256]");
  return ep;
}

json ProviderStats::to_json() const {
  return json{{"logical_calls", logical_calls.load()},
              {"cache_hits", cache_hits.load()},
              {"retries", retries.load()},
              {"network_ops", network_ops->load()}};
}

json extract_path(const json& root, const std::string& path) {
  json current = root;
  size_t pos = 0;
  while (pos <= path.size()) {
    size_t dot = path.find('.', pos);
    std::string token = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    pos = dot == std::string::npos ? path.size() + 1 : dot + 1;
    if (token.empty()) continue;
    if (token == "*") {
      if (!current.is_array()) throw Error("path '" + path + "': '*' applied to non-array");
      json rest_result = json::array();
      std::string rest = pos <= path.size() ? path.substr(pos) : "";
      for (const auto& item : current)
        rest_result.push_back(rest.empty() ? item : extract_path(item, rest));
      return rest_result;
    }
    if (current.is_array()) {
      size_t idx = 0;
      try {
        idx = static_cast<size_t>(std::stoul(token));
      } catch (...) {
        throw Error("path '" + path + "': expected array index, got '" + token + "'");
      }
      if (idx >= current.size()) throw Error("path '" + path + "': index out of range");
      current = current.at(idx);
    } else if (current.is_object()) {
      if (!current.contains(token)) throw Error("path '" + path + "': missing key '" + token + "'");
      current = current.at(token);
    } else {
      throw Error("path '" + path + "': cannot descend into scalar");
    }
  }
  return current;
}

json GenerationRequest::logical() const {
  json messages = json::array();
  for (const auto& m : role_messages) messages.push_back({{"role", m.role}, {"text", m.text}});
  return json{{"op", "generate"},   {"prompt", prompt}, {"n_samples", n_samples},
              {"temperature", temperature}, {"messages", messages}, {"tag", tag}};
}

NliJudgment NliJudgment::make(double e, double c, double n) {
  NliJudgment j{e, c, n};
  if (!j.valid())
    throw Error("invalid NLI judgment: probabilities must lie in [0,1] and sum to 1");
  return j;
}

ProviderClientBase::ProviderClientBase(ProviderEndpoint endpoint, ReplayMode mode,
                                       std::shared_ptr<ReplayCache> cache,
                                       std::shared_ptr<Transport> transport,
                                       std::shared_ptr<ProviderStats> stats, Sleeper sleeper)
    : endpoint_(std::move(endpoint)),
      mode_(mode),
      cache_(std::move(cache)),
      transport_(std::move(transport)),
      stats_(stats ? std::move(stats) : std::make_shared<ProviderStats>()),
      sleeper_(sleeper ? std::move(sleeper)
                       : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      inflight_(std::make_unique<std::counting_semaphore<256>>(endpoint_.parallelism)) {}

json ProviderClientBase::roundtrip(const json& logical,
                                   const std::function<json()>& wire_body) {
  stats_->logical_calls.fetch_add(1);
  const std::string key = cache_key(endpoint_.id, logical);

  if (cache_) {
    if (auto payload = cache_->lookup(key)) {
      stats_->cache_hits.fetch_add(1);
      const std::string& body = payload->at("body").get_ref<const std::string&>();
      json decoded = json::parse(body, nullptr, false);
      if (decoded.is_discarded()) throw DecodeError("replayed payload is not valid JSON", body);
      return decoded;
    }
  }
  if (mode_ == ReplayMode::StrictReplay) throw ReplayMissError(key);

  HeaderList headers;
  if (!endpoint_.auth_env_var.empty()) {
    const char* token = std::getenv(endpoint_.auth_env_var.c_str());
    if (!token)
      throw ConfigError("provider " + endpoint_.id + ": env var " + endpoint_.auth_env_var +
                        " is not set");
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = wire_body().dump();

  constexpr int kMaxAttempts = 3;
  std::chrono::milliseconds backoff{500};
  HttpResponse resp;
  for (int attempt = 1;; ++attempt) {
    try {
      inflight_->acquire();
      struct Release {
        std::counting_semaphore<256>* s;
        ~Release() { s->release(); }
      } release{inflight_.get()};
      resp = transport_->post_json(endpoint_.url, headers, body);
    } catch (const ProviderError& e) {
      if (!e.retryable || attempt >= kMaxAttempts)
        throw ProviderError(std::string(e.what()) + " (after " + std::to_string(attempt) +
                                " attempts)",
                            e.retryable, attempt);
      stats_->retries.fetch_add(1);
      sleeper_(backoff);
      backoff *= 2;
      continue;
    }
    if (resp.status >= 500) {
      if (attempt >= kMaxAttempts)
        throw ProviderError("provider " + endpoint_.id + " returned " +
                                std::to_string(resp.status) + " (after " +
                                std::to_string(attempt) + " attempts): " +
                                resp.body.substr(0, 400),
                            true, attempt);
      stats_->retries.fetch_add(1);
      sleeper_(backoff);
      backoff *= 2;
      continue;
    }
    break;
  }
  if (resp.status < 200 || resp.status >= 300)
    throw ProviderError("provider " + endpoint_.id + " returned " + std::to_string(resp.status) +
                            ": " + resp.body,
                        false);

  json payload{{"status", resp.status}, {"body", resp.body}};
  if (mode_ == ReplayMode::Record && cache_)
    cache_->record(CacheEntry{key, endpoint_.id, logical, payload, ""});

  json decoded = json::parse(resp.body, nullptr, false);
  if (decoded.is_discarded()) throw DecodeError("provider payload is not valid JSON", resp.body);
  return decoded;
}

std::vector<std::string> GenerationClient::generate(const GenerationRequest& req) {
  req.validate();
  if (req.prompt.empty() && req.role_messages.empty())
    throw Error("generate: empty prompt and no role messages");
  json logical = req.logical();
  logical["model"] = endpoint_.model;

  auto wire = [&]() {
    json messages = json::array();
    for (const auto& m : req.role_messages)
      messages.push_back({{"role", m.role}, {"content", m.text}});
    if (!req.prompt.empty()) messages.push_back({{"role", "user"}, {"content", req.prompt}});
    std::map<std::string, json> exact{{"n_samples", req.n_samples},
                                      {"temperature", req.temperature},
                                      {"messages_json", messages}};
    std::map<std::string, std::string> textual{
        {"model", endpoint_.model}, {"prompt", req.prompt}, {"tag", req.tag}};
    return substitute(endpoint_.request_template, exact, textual);
  };

  json body = roundtrip(logical, wire);
  json texts = extract_path(body, endpoint_.response_paths.at("texts").get<std::string>());
  if (!texts.is_array()) throw DecodeError("texts path did not yield an array", body.dump());
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (!t.is_string()) throw DecodeError("texts path yielded a non-string item", body.dump());
    out.push_back(t.get<std::string>());
  }
  if (static_cast<int>(out.size()) != req.n_samples)
    throw DecodeError("provider returned " + std::to_string(out.size()) + " texts, expected " +
                          std::to_string(req.n_samples),
                      body.dump());
  return out;
}

NliJudgment NliClient::nli(const std::string& premise, const std::string& hypothesis) {
  if (premise.empty() || hypothesis.empty()) throw Error("nli: premise and hypothesis must be nonempty");
  json logical{{"op", "nli"}, {"premise", premise}, {"hypothesis", hypothesis},
               {"model", endpoint_.model}};
  auto wire = [&]() {
    std::map<std::string, json> exact;
    std::map<std::string, std::string> textual{
        {"model", endpoint_.model}, {"premise", premise}, {"hypothesis", hypothesis}};
    return substitute(endpoint_.request_template, exact, textual);
  };
  json body = roundtrip(logical, wire);
  const std::string raw = body.dump();
  double e = to_double(extract_path(body, endpoint_.response_paths.at("entailment").get<std::string>()),
                       "entailment", raw);
  double c = to_double(
      extract_path(body, endpoint_.response_paths.at("contradiction").get<std::string>()),
      "contradiction", raw);
  double n = to_double(extract_path(body, endpoint_.response_paths.at("neutral").get<std::string>()),
                       "neutral", raw);
  NliJudgment j{e, c, n};
  if (!j.valid()) throw DecodeError("NLI probabilities invalid or do not sum to 1", raw);
  return j;
}

namespace {

EmbeddingVector decode_vector(const json& arr, const std::string& model_id, const std::string& raw) {
  if (!arr.is_array() || arr.empty()) throw DecodeError("embedding path did not yield an array", raw);
  EmbeddingVector v;
  v.model_id = model_id;
  v.values.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) throw DecodeError("embedding contains a non-number", raw);
    v.values.push_back(x.get<double>());
  }
  if (!v.finite() || v.norm() == 0.0)
    throw DecodeError("embedding must be finite with nonzero norm", raw);
  return v;
}

}  // namespace

EmbeddingVector EmbeddingClient::embed(const std::string& text) {
  if (text.empty()) throw Error("embed: text must be nonempty");
  json logical{{"op", "embed"}, {"text", text}, {"model", endpoint_.model}};
  auto wire = [&]() {
    std::map<std::string, json> exact;
    std::map<std::string, std::string> textual{
        {"model", endpoint_.model}, {"text", text}, {"mode", "single"}};
    return substitute(endpoint_.request_template, exact, textual);
  };
  json body = roundtrip(logical, wire);
  const std::string raw = body.dump();
  std::string model_id = endpoint_.model;
  if (endpoint_.response_paths.contains("model")) {
    try {
      json m = extract_path(body, endpoint_.response_paths.at("model").get<std::string>());
      if (m.is_string()) model_id = m.get<std::string>();
    } catch (const Error&) {
      // model id in the payload is optional
    }
  }
  return decode_vector(extract_path(body, endpoint_.response_paths.at("embedding").get<std::string>()),
                       model_id, raw);
}

std::vector<TokenEmbedding> EmbeddingClient::embed_tokens(const std::string& text) {
  if (text.empty()) throw Error("embed_tokens: text must be nonempty");
  json logical{{"op", "embed_tokens"}, {"text", text}, {"model", endpoint_.model}};
  auto wire = [&]() {
    std::map<std::string, json> exact;
    std::map<std::string, std::string> textual{
        {"model", endpoint_.model}, {"text", text}, {"mode", "tokens"}};
    return substitute(endpoint_.request_template, exact, textual);
  };
  json body = roundtrip(logical, wire);
  const std::string raw = body.dump();
  json tokens = extract_path(body, endpoint_.response_paths.at("tokens").get<std::string>());
  json vectors =
      extract_path(body, endpoint_.response_paths.at("token_embeddings").get<std::string>());
  if (!tokens.is_array() || !vectors.is_array() || tokens.size() != vectors.size())
    throw DecodeError("token and embedding counts disagree", raw);
  if (tokens.empty()) throw DecodeError("tokenizer produced no tokens", raw);
  std::vector<TokenEmbedding> out;
  out.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens.at(i).is_string()) throw DecodeError("token is not a string", raw);
    out.push_back({tokens.at(i).get<std::string>(),
                   decode_vector(vectors.at(i), endpoint_.model, raw)});
  }
  return out;
}

ProviderSet::ProviderSet(const json& provider_blocks, ProviderSetOptions opts)
    : network_ops_(std::make_shared<std::atomic<long>>(0)) {
  if (!provider_blocks.is_object()) throw ConfigError("providers config must be an object");
  if (opts.mode != ReplayMode::Live) {
    if (opts.replay_store.empty())
      throw ConfigError("replay_store is required in record and strict_replay modes");
    cache_ = std::make_shared<ReplayCache>(opts.replay_store);
    if (opts.clock) cache_->set_clock(opts.clock);
  }

  auto build_transport = [&](const ProviderEndpoint& ep) -> std::shared_ptr<Transport> {
    if (opts.mode == ReplayMode::StrictReplay) {
      if (!ep.url.empty())
        throw ConfigError("strict_replay forbids live provider blocks: provider '" + ep.id +
                          "' sets a url");
      // No inner transport: any network attempt is a hard error, and the
      // shared counter lets tests assert zero operations.
      return std::make_shared<CountingTransport>(nullptr, network_ops_);
    }
    if (ep.url.empty())
      throw ConfigError("provider '" + ep.id + "' needs a url in " + to_string(opts.mode) +
                        " mode");
    std::shared_ptr<Transport> inner =
        opts.transport_factory ? opts.transport_factory() : std::make_shared<HttpTransport>();
    return std::make_shared<CountingTransport>(inner, network_ops_);
  };

  for (auto it = provider_blocks.begin(); it != provider_blocks.end(); ++it) {
    ProviderEndpoint ep = ProviderEndpoint::parse(it.key(), it.value());
    auto stats = std::make_shared<ProviderStats>();
    stats->network_ops = network_ops_;
    auto transport = build_transport(ep);
    if (ep.kind == "generation")
      generation_ = std::make_unique<GenerationClient>(ep, opts.mode, cache_, transport, stats,
                                                       opts.sleeper);
    else if (ep.kind == "nli")
      nli_ = std::make_unique<NliClient>(ep, opts.mode, cache_, transport, stats, opts.sleeper);
    else
      embedding_ =
          std::make_unique<EmbeddingClient>(ep, opts.mode, cache_, transport, stats, opts.sleeper);
  }
}

TextGenerator& ProviderSet::generation() {
  if (!generation_) throw ConfigError("no generation provider configured");
  return *generation_;
}

NliProvider& ProviderSet::nli() {
  if (!nli_) throw ConfigError("no nli provider configured");
  return *nli_;
}

Embedder& ProviderSet::embedding() {
  if (!embedding_) throw ConfigError("no embedding provider configured");
  return *embedding_;
}

json ProviderSet::stats_json() const {
  json out{{"network_ops", network_ops_->load()}};
  if (generation_) out["generation"] = generation_->stats().to_json();
  if (nli_) out["nli"] = nli_->stats().to_json();
  if (embedding_) out["embedding"] = embedding_->stats().to_json();
  return out;
}

}  // namespace credence
