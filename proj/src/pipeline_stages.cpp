#include "credence/pipeline/stages.hpp"

#include <algorithm>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include "credence/aggregation/aggregate.hpp"
#include "credence/decomposition/claims.hpp"
#include "credence/decomposition/questions.hpp"
#include "credence/decomposition/sentences.hpp"
#include "credence/errors.hpp"
#include "credence/evaluation/cost.hpp"
#include "credence/evaluation/grading.hpp"
#include "credence/evaluation/metrics.hpp"
#include "credence/graph/centrality.hpp"
#include "credence/graph/entailment_graph.hpp"
#include "credence/hashing.hpp"
#include "credence/jsonl.hpp"
#include "credence/parallel.hpp"
#include "credence/scorers/scorers.hpp"
#include "credence/text.hpp"

namespace credence {

using nlohmann::json;

namespace {

// Counts logical generator traffic for one accounting context.
class CountingGenerator final : public TextGenerator {
 public:
  CountingGenerator(TextGenerator& inner, std::atomic<long>* calls,
                    std::atomic<long>* completions)
      : inner_(inner), calls_(calls), completions_(completions) {}
  std::vector<std::string> generate(const GenerationRequest& req) override {
    auto out = inner_.generate(req);
    if (calls_) calls_->fetch_add(1);
    if (completions_) completions_->fetch_add(req.n_samples);
    return out;
  }

 private:
  TextGenerator& inner_;
  std::atomic<long>* calls_;
  std::atomic<long>* completions_;
};

class CountingNli final : public NliProvider {
 public:
  CountingNli(NliProvider& inner, std::atomic<long>* counter) : inner_(inner), counter_(counter) {}
  NliJudgment nli(const std::string& premise, const std::string& hypothesis) override {
    if (counter_) counter_->fetch_add(1);
    return inner_.nli(premise, hypothesis);
  }

 private:
  NliProvider& inner_;
  std::atomic<long>* counter_;
};

std::string scorer_key(const ScorerConfig& s) { return s.name(); }

json exception_row(const std::string& stage, const std::string& scorer, const std::string& unit_id,
                   const std::string& error) {
  return json{{"stage", stage}, {"scorer", scorer}, {"unit_id", unit_id}, {"error", error}};
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg, ProviderSet& providers)
    : cfg_(std::move(cfg)), providers_(providers) {
  run_dir_ = cfg_.run_dir_path();
  std::filesystem::create_directories(run_dir_);
  dataset_ = load_dataset(cfg_.dataset_path());
  manifest_ = RunManifest::load_or_init(run_dir_, cfg_.fingerprint());
  if (manifest_.run_metadata.empty()) {
    manifest_.run_metadata = json{{"replay_mode", to_string(cfg_.replay_mode)},
                                  {"temperature", cfg_.temperature},
                                  {"seed", cfg_.seed},
                                  {"abbreviation_table", kAbbreviationTableVersion},
                                  {"negentropy_normalizer", "ln(n)"},
                                  {"entail_threshold", cfg_.entail_threshold},
                                  {"edge_threshold", cfg_.edge_threshold},
                                  {"verbalized_mapping", "bucket-upper-mid"},
                                  {"reconstruction_prompt", "non-standard (not from a published protocol)"}};
    manifest_.save(run_dir_);
  }
}

std::filesystem::path Pipeline::artifact_path(const char* name) const { return run_dir_ / name; }

void Pipeline::require_completed(const std::string& stage, const std::string& for_stage) const {
  if (!manifest_.stage_completed(stage))
    throw ConfigError("stage '" + for_stage + "' requires completed stage '" + stage +
                      "'; run it first");
}

bool Pipeline::any_scorer(Granularity g) const {
  return std::any_of(cfg_.scorers.begin(), cfg_.scorers.end(),
                     [&](const ScorerConfig& s) { return s.granularity == g; });
}

bool Pipeline::has_family(ScorerFamily f) const {
  return std::any_of(cfg_.scorers.begin(), cfg_.scorers.end(),
                     [&](const ScorerConfig& s) { return s.family == f; });
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

void Pipeline::run_generate() {
  if (manifest_.stage_completed("generate")) return;
  std::vector<json> rows(dataset_.size());
  parallel_for(dataset_.size(), cfg_.parallelism, [&](size_t i) {
    const auto& p = dataset_[i];
    GenerationRequest original;
    original.prompt = p.prompt;
    original.n_samples = 1;
    original.temperature = cfg_.temperature;
    std::string y0;
    try {
      y0 = providers_.generation().generate(original).at(0);
      GenerationRequest sampled = original;
      sampled.n_samples = cfg_.m;
      auto samples = providers_.generation().generate(sampled);
      rows[i] = json{{"prompt_id", p.prompt_id}, {"original", y0}, {"samples", samples}};
    } catch (const Error& e) {
      throw ProviderError("generation failed for prompt '" + p.prompt_id + "': " + e.what(),
                          false);
    }
  });
  JsonlWriter w(run_dir_ / artifact::kResponses, false);
  for (const auto& r : rows) w.write(r);
  w.flush();
  manifest_.mark_stage("generate", {artifact::kResponses}, run_dir_);
  std::cerr << "[generate] " << rows.size() << " prompts, 1+" << cfg_.m
            << " responses each\n";
}

std::vector<Pipeline::ResponseSet> Pipeline::load_responses() const {
  std::vector<ResponseSet> out;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kResponses)) {
    ResponseSet rs;
    rs.prompt_id = rec.at("prompt_id").get<std::string>();
    rs.original_id = response_id(rs.prompt_id);
    rs.original = rec.at("original").get<std::string>();
    auto samples = rec.at("samples").get<std::vector<std::string>>();
    for (size_t j = 0; j < samples.size(); ++j) {
      rs.sample_ids.push_back(sample_id(rs.prompt_id, static_cast<int>(j)));
      rs.samples.push_back(samples[j]);
    }
    out.push_back(std::move(rs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

void Pipeline::run_decompose() {
  require_completed("generate", "decompose");
  if (manifest_.stage_completed("decompose")) return;
  auto responses = load_responses();

  const bool need_sent = any_scorer(Granularity::Sentence);
  const bool need_union = has_family(ScorerFamily::GraphBased);
  const bool need_claims = any_scorer(Granularity::Claim) || need_union;
  const bool need_sample_sents = has_family(ScorerFamily::MatchedUnit);

  struct DecompResult {
    DecomposedResponse y0_sents;
    DecomposedResponse y0_claims;
    std::vector<DecomposedResponse> sample_sents;
    ClaimUnion claim_union;
    bool has_union = false;
  };
  std::vector<DecompResult> results(responses.size());

  parallel_for(responses.size(), cfg_.parallelism, [&](size_t i) {
    const auto& rs = responses[i];
    auto& r = results[i];
    if (need_sent) r.y0_sents = split_sentences(rs.original_id, rs.original);
    if (need_claims)
      r.y0_claims = extract_claims(providers_.generation(), prompts_, rs.original_id, rs.original);
    if (need_sample_sents)
      for (size_t j = 0; j < rs.samples.size(); ++j)
        r.sample_sents.push_back(split_sentences(rs.sample_ids[j], rs.samples[j]));
    if (need_union) {
      r.claim_union = seed_claim_union(r.y0_claims);
      // Sequential by construction: each merge depends on the union so far.
      for (size_t j = 0; j < rs.samples.size(); ++j) {
        auto sample_claims = extract_claims(providers_.generation(), prompts_, rs.sample_ids[j],
                                            rs.samples[j]);
        r.claim_union = merge_claims(providers_.generation(), prompts_, r.claim_union,
                                     sample_claims.units, rs.sample_ids[j],
                                     rs.prompt_id + "/union");
      }
      r.has_union = true;
    }
  });

  JsonlWriter units(run_dir_ / artifact::kUnits, false);
  JsonlWriter union_file(run_dir_ / artifact::kUnion, false);
  JsonlWriter meta(run_dir_ / artifact::kPromptMeta, false);
  for (size_t i = 0; i < responses.size(); ++i) {
    const auto& r = results[i];
    for (const auto& u : r.y0_sents.units) units.write(u.to_json());
    for (const auto& u : r.y0_claims.units) units.write(u.to_json());
    for (const auto& d : r.sample_sents)
      for (const auto& u : d.units) units.write(u.to_json());
    json meta_row{{"prompt_id", responses[i].prompt_id},
                  {"n_sent", r.y0_sents.units.size()},
                  {"n_claim", r.y0_claims.units.size()},
                  {"n_union", r.has_union ? r.claim_union.claims.size() : 0}};
    if (r.has_union) {
      std::vector<std::string> claim_ids;
      json provenance = json::object();
      for (const auto& c : r.claim_union.claims) {
        claim_ids.push_back(c.id);
        auto it = r.claim_union.provenance.find(c.id);
        provenance[c.id] =
            it == r.claim_union.provenance.end()
                ? std::vector<std::string>{}
                : std::vector<std::string>(it->second.begin(), it->second.end());
        // Units added during merging are not part of the original response's
        // decomposition; persist them here so every claim id resolves.
        if (c.source_response != responses[i].original_id) units.write(c.to_json());
      }
      union_file.write(json{{"prompt_id", responses[i].prompt_id},
                            {"claim_ids", claim_ids},
                            {"provenance", provenance}});
    }
    meta.write(meta_row);
  }
  units.flush();
  union_file.flush();
  meta.flush();
  manifest_.mark_stage("decompose", {artifact::kUnits, artifact::kUnion, artifact::kPromptMeta},
                       run_dir_);
  std::cerr << "[decompose] " << responses.size() << " prompts -> " << units.lines_written()
            << " units\n";
}

std::map<std::string, Unit> Pipeline::load_units() const {
  std::map<std::string, Unit> out;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kUnits)) {
    Unit u = Unit::from_json(rec);
    out[u.id] = std::move(u);
  }
  return out;
}

std::map<std::string, std::vector<Unit>> Pipeline::load_units_by_response(Granularity g) const {
  std::map<std::string, std::vector<Unit>> out;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kUnits)) {
    Unit u = Unit::from_json(rec);
    if (u.granularity == g) out[u.source_response].push_back(std::move(u));
  }
  for (auto& [_, units] : out)
    std::sort(units.begin(), units.end(),
              [](const Unit& a, const Unit& b) { return a.ordinal < b.ordinal; });
  return out;
}

std::map<std::string, ClaimUnion> Pipeline::load_unions(
    const std::map<std::string, Unit>& units) const {
  std::map<std::string, ClaimUnion> out;
  if (!std::filesystem::exists(run_dir_ / artifact::kUnion)) return out;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kUnion)) {
    ClaimUnion cu;
    for (const auto& id : rec.at("claim_ids").get<std::vector<std::string>>()) {
      auto it = units.find(id);
      if (it == units.end()) throw Error("union references unknown unit id " + id);
      cu.claims.push_back(it->second);
    }
    for (auto it = rec.at("provenance").begin(); it != rec.at("provenance").end(); ++it) {
      auto list = it.value().get<std::vector<std::string>>();
      cu.provenance[it.key()] = std::set<std::string>(list.begin(), list.end());
    }
    out[rec.at("prompt_id").get<std::string>()] = std::move(cu);
  }
  return out;
}

std::map<std::string, Pipeline::PromptMeta> Pipeline::load_prompt_meta() const {
  std::map<std::string, PromptMeta> out;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kPromptMeta)) {
    PromptMeta m;
    m.n_sent = rec.value("n_sent", 0L);
    m.n_claim = rec.value("n_claim", 0L);
    m.n_union = rec.value("n_union", 0L);
    out[rec.at("prompt_id").get<std::string>()] = m;
  }
  return out;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

void Pipeline::run_score() {
  require_completed("decompose", "score");
  if (manifest_.stage_completed("score")) return;
  if (cfg_.scorers.empty()) throw ConfigError("score: no scorers configured");

  auto responses = load_responses();
  auto all_units = load_units();
  auto by_resp_sent = load_units_by_response(Granularity::Sentence);
  auto by_resp_claim = load_units_by_response(Granularity::Claim);
  auto unions = load_unions(all_units);

  std::map<std::string, std::unique_ptr<ScorerCounters>> counters;
  std::vector<json> score_rows;
  std::vector<json> graph_rows;
  std::vector<json> centrality_rows;
  std::vector<json> exception_rows;
  std::mutex row_mu;

  for (const auto& scorer : cfg_.scorers) {
    std::cerr << "[score] " << scorer.name() << "\n";
    const std::string fp = scorer.fingerprint();
    auto& C = *counters.emplace(fp, std::make_unique<ScorerCounters>()).first->second;
    EtaEvaluator eta(providers_.has_nli() ? &providers_.nli() : nullptr,
                     providers_.has_embedding() ? &providers_.embedding() : nullptr,
                     &C.comparisons);
    const int m_eff = cfg_.effective_m(scorer);
    const int m_qa_eff = cfg_.effective_m_qa(scorer);
    const int q_eff = cfg_.effective_q(scorer);

    for (const auto& rs : responses) {
      if (static_cast<int>(rs.samples.size()) < m_eff)
        throw ConfigError("scorer " + scorer.name() + " wants m=" + std::to_string(m_eff) +
                          " but only " + std::to_string(rs.samples.size()) +
                          " samples were generated");
      const auto& y0_units = scorer.granularity == Granularity::Sentence
                                 ? by_resp_sent[rs.original_id]
                                 : by_resp_claim[rs.original_id];
      std::vector<std::string> cand_texts(rs.samples.begin(), rs.samples.begin() + m_eff);
      std::vector<std::string> cand_ids(rs.sample_ids.begin(), rs.sample_ids.begin() + m_eff);

      auto record_rows = [&](std::vector<std::optional<ScoreRecord>>& recs) {
        std::lock_guard<std::mutex> lock(row_mu);
        for (const auto& r : recs)
          if (r) score_rows.push_back(r->to_json());
      };

      switch (scorer.family) {
        case ScorerFamily::UnitResponse: {
          C.sampled_generations += m_eff;
          if (scorer.granularity == Granularity::Claim) C.original_decomposition_generations += 1;
          ConsistencyKind kind = to_consistency_kind(scorer.signal);
          std::vector<std::optional<ScoreRecord>> recs(y0_units.size());
          parallel_for(y0_units.size(), cfg_.parallelism, [&](size_t ui) {
            try {
              recs[ui] = unit_response_score(y0_units[ui], cand_texts, kind, eta, fp);
            } catch (const Error& e) {
              std::lock_guard<std::mutex> lock(row_mu);
              exception_rows.push_back(
                  exception_row("score", scorer.name(), y0_units[ui].id, e.what()));
            }
          });
          record_rows(recs);
          break;
        }
        case ScorerFamily::MatchedUnit: {
          C.sampled_generations += m_eff;
          ConsistencyKind kind = to_consistency_kind(scorer.signal);
          std::vector<DecomposedResponse> cands;
          for (int j = 0; j < m_eff; ++j) {
            DecomposedResponse d;
            d.response_id = cand_ids[static_cast<size_t>(j)];
            d.granularity = Granularity::Sentence;
            auto it = by_resp_sent.find(d.response_id);
            if (it != by_resp_sent.end()) d.units = it->second;
            cands.push_back(std::move(d));
          }
          std::vector<std::optional<ScoreRecord>> recs(y0_units.size());
          parallel_for(y0_units.size(), cfg_.parallelism, [&](size_t ui) {
            try {
              recs[ui] = matched_unit_score(y0_units[ui], cands, kind, eta, fp);
            } catch (const Error& e) {
              std::lock_guard<std::mutex> lock(row_mu);
              exception_rows.push_back(
                  exception_row("score", scorer.name(), y0_units[ui].id, e.what()));
            }
          });
          record_rows(recs);
          break;
        }
        case ScorerFamily::UnitQa: {
          if (scorer.granularity == Granularity::Claim) C.original_decomposition_generations += 1;
          std::vector<std::optional<ScoreRecord>> recs(y0_units.size());
          parallel_for(y0_units.size(), cfg_.parallelism, [&](size_t ui) {
            const Unit& unit = y0_units[ui];
            try {
              CountingGenerator question_gen(providers_.generation(), &C.question_generations,
                                             nullptr);
              auto questions =
                  invert_questions(question_gen, prompts_, rs.original, unit, q_eff);
              CountingGenerator answer_gen(providers_.generation(), nullptr,
                                           &C.answer_generations);
              std::vector<QuestionAnswers> evidence;
              for (const auto& question : questions) {
                QuestionAnswers qa;
                GenerationRequest original_req;
                original_req.prompt = question.text;
                original_req.n_samples = 1;
                original_req.temperature = cfg_.temperature;
                qa.original = answer_gen.generate(original_req).at(0);
                GenerationRequest sampled_req = original_req;
                sampled_req.n_samples = m_qa_eff;
                qa.sampled = answer_gen.generate(sampled_req);
                evidence.push_back(std::move(qa));
              }
              recs[ui] =
                  unit_qa_score(unit, evidence, scorer.signal, eta, cfg_.entail_threshold, fp);
            } catch (const Error& e) {
              std::lock_guard<std::mutex> lock(row_mu);
              exception_rows.push_back(exception_row("score", scorer.name(), unit.id, e.what()));
            }
          });
          record_rows(recs);
          break;
        }
        case ScorerFamily::GraphBased: {
          C.sampled_generations += m_eff;
          C.original_decomposition_generations += 1;
          C.sample_decomposition_generations += m_eff;
          C.merge_generations += m_eff;
          auto union_it = unions.find(rs.prompt_id);
          if (union_it == unions.end())
            throw Error("score: no claim union for prompt " + rs.prompt_id);
          CountingNli counting_nli(providers_.nli(), &C.comparisons);
          auto graph = build_graph(counting_nli, union_it->second, cand_ids, cand_texts,
                                   cfg_.edge_threshold, cfg_.parallelism);
          auto report = centrality_report(graph, cfg_.pagerank_damping);
          auto recs = graph_based_scores(graph, report, scorer.signal, fp);
          {
            std::lock_guard<std::mutex> lock(row_mu);
            for (const auto& r : recs) score_rows.push_back(r.to_json());
            for (const auto& c : graph.claim_nodes)
              graph_rows.push_back(json{{"type", "claim_node"},
                                        {"prompt_id", rs.prompt_id},
                                        {"scorer", scorer.name()},
                                        {"id", c.id},
                                        {"text", c.text}});
            for (const auto& rid : graph.response_ids)
              graph_rows.push_back(json{{"type", "response_node"},
                                        {"prompt_id", rs.prompt_id},
                                        {"scorer", scorer.name()},
                                        {"id", rid}});
            for (const auto& [ci, ri] : graph.edges)
              graph_rows.push_back(
                  json{{"type", "edge"},
                       {"prompt_id", rs.prompt_id},
                       {"scorer", scorer.name()},
                       {"claim_id", graph.claim_nodes[static_cast<size_t>(ci)].id},
                       {"response_id", graph.response_ids[static_cast<size_t>(ri)]}});
            for (size_t ci = 0; ci < graph.claim_nodes.size(); ++ci) {
              const auto& pc = report.per_claim[ci];
              centrality_rows.push_back(json{{"prompt_id", rs.prompt_id},
                                             {"scorer", scorer.name()},
                                             {"claim_id", graph.claim_nodes[ci].id},
                                             {"betweenness", pc.betweenness},
                                             {"closeness", pc.closeness},
                                             {"harmonic", pc.harmonic},
                                             {"laplacian", pc.laplacian},
                                             {"pagerank", pc.pagerank},
                                             {"disconnected", pc.disconnected}});
            }
            for (const auto& w : report.warnings)
              exception_rows.push_back(exception_row("score", scorer.name(), rs.prompt_id, w));
          }
          break;
        }
        case ScorerFamily::Verbalized: {
          if (scorer.granularity == Granularity::Claim) C.original_decomposition_generations += 1;
          const std::string& question = [&]() -> const std::string& {
            for (const auto& p : dataset_)
              if (p.prompt_id == rs.prompt_id) return p.prompt;
            throw Error("score: prompt " + rs.prompt_id + " missing from dataset");
          }();
          std::vector<std::optional<ScoreRecord>> recs(y0_units.size());
          parallel_for(y0_units.size(), cfg_.parallelism, [&](size_t ui) {
            try {
              CountingGenerator verbal_gen(providers_.generation(), nullptr,
                                           &C.verbalized_generations);
              recs[ui] = verbalized_confidence(verbal_gen, prompts_, y0_units[ui], question, fp);
            } catch (const Error& e) {
              std::lock_guard<std::mutex> lock(row_mu);
              exception_rows.push_back(
                  exception_row("score", scorer.name(), y0_units[ui].id, e.what()));
            }
          });
          record_rows(recs);
          break;
        }
      }
    }
  }

  JsonlWriter scores(run_dir_ / artifact::kScores, false);
  for (const auto& r : score_rows) scores.write(r);
  JsonlWriter graphs(run_dir_ / artifact::kGraph, false);
  for (const auto& r : graph_rows) graphs.write(r);
  JsonlWriter cent(run_dir_ / artifact::kCentrality, false);
  for (const auto& r : centrality_rows) cent.write(r);
  JsonlWriter exceptions(run_dir_ / artifact::kExceptions, false);
  for (const auto& r : exception_rows) exceptions.write(r);

  json counters_json{{"prompts", json::object()}, {"scorers", json::object()}};
  for (const auto& [pid, m] : load_prompt_meta())
    counters_json["prompts"][pid] =
        json{{"n_sent", m.n_sent}, {"n_claim", m.n_claim}, {"n_union", m.n_union}};
  for (const auto& scorer : cfg_.scorers) {
    const std::string fp = scorer.fingerprint();
    counters_json["scorers"][fp] = json{{"name", scorer.name()},
                                        {"family", to_string(scorer.family)},
                                        {"granularity", to_string(scorer.granularity)},
                                        {"eta", to_string(scorer.signal)},
                                        {"counters", counters.at(fp)->to_json()}};
  }
  write_text_file(run_dir_ / artifact::kCounters, counters_json.dump(2) + "\n");
  // Physical provider traffic depends on resume history, so it lives outside
  // the deterministic artifact set.
  write_text_file(run_dir_ / "provider_stats.json", providers_.stats_json().dump(2) + "\n");

  manifest_.mark_stage("score",
                       {artifact::kScores, artifact::kGraph, artifact::kCentrality,
                        artifact::kExceptions, artifact::kCounters},
                       run_dir_);
  std::cerr << "[score] " << score_rows.size() << " score records, " << exception_rows.size()
            << " exceptions\n";
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

void Pipeline::run_aggregate() {
  require_completed("score", "aggregate");
  if (manifest_.stage_completed("aggregate")) return;

  auto responses = load_responses();
  auto by_resp_sent = load_units_by_response(Granularity::Sentence);
  auto by_resp_claim = load_units_by_response(Granularity::Claim);

  // scorer name -> unit_id -> score
  std::map<std::string, std::map<std::string, double>> scores_by_scorer;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kScores)) {
    ScoreRecord r = ScoreRecord::from_json(rec);
    ScorerConfig key;
    key.family = r.family;
    key.granularity = r.granularity;
    key.signal = r.signal;
    scores_by_scorer[scorer_key(key)][r.unit_id] = r.score;
  }

  json counters_json = json::parse(read_text_file(run_dir_ / artifact::kCounters));

  std::vector<json> rows;
  std::vector<json> reconstruction_rows;
  for (const auto& scorer : cfg_.scorers) {
    const std::string fp = scorer.fingerprint();
    const auto& unit_scores = scores_by_scorer[scorer_key(scorer)];
    long reconstructions = 0;
    for (const auto& rs : responses) {
      const auto& y0_units = scorer.granularity == Granularity::Sentence
                                 ? by_resp_sent[rs.original_id]
                                 : by_resp_claim[rs.original_id];
      std::vector<double> values;
      std::vector<ScoredClaim> claims;
      for (const auto& u : y0_units) {
        auto it = unit_scores.find(u.id);
        if (it == unit_scores.end()) continue;  // unit was excluded during scoring
        values.push_back(it->second);
        claims.push_back({u.id, it->second});
      }
      if (values.empty()) continue;
      auto avg = aggregate_avg(rs.original_id, fp, values);
      json avg_row = avg.to_json();
      avg_row["scorer"] = scorer.name();
      rows.push_back(std::move(avg_row));

      if (cfg_.uad && scorer.granularity == Granularity::Claim) {
        auto uad = uad_filter(rs.original_id, fp, claims, cfg_.tau_claim);
        json uad_row = uad.to_json();
        uad_row["scorer"] = scorer.name();
        rows.push_back(std::move(uad_row));
        if (!uad.retained_unit_ids.empty()) {
          std::vector<Unit> retained;
          for (const auto& u : y0_units)
            if (std::find(uad.retained_unit_ids.begin(), uad.retained_unit_ids.end(), u.id) !=
                uad.retained_unit_ids.end())
              retained.push_back(u);
          std::string text = reconstruct_response(providers_.generation(), prompts_, retained);
          ++reconstructions;
          reconstruction_rows.push_back(json{{"response_id", rs.original_id},
                                             {"config_fp", fp},
                                             {"scorer", scorer.name()},
                                             {"tau", cfg_.tau_claim},
                                             {"retained_unit_ids", uad.retained_unit_ids},
                                             {"text", text}});
        }
      }
    }
    if (counters_json["scorers"].contains(fp)) {
      // Re-derive the total from components so a re-run of this stage cannot
      // double-count.
      ScorerCounters updated;
      ScorerCounters::from_json(counters_json["scorers"][fp]["counters"], updated);
      updated.reconstruction_generations = reconstructions;
      counters_json["scorers"][fp]["counters"] = updated.to_json();
    }
  }

  JsonlWriter w(run_dir_ / artifact::kResponseScores, false);
  for (const auto& r : rows) w.write(r);
  JsonlWriter rec_w(run_dir_ / artifact::kReconstructions, false);
  for (const auto& r : reconstruction_rows) rec_w.write(r);
  write_text_file(run_dir_ / artifact::kCounters, counters_json.dump(2) + "\n");

  manifest_.mark_stage(
      "aggregate",
      {artifact::kResponseScores, artifact::kReconstructions, artifact::kCounters}, run_dir_);
}

// ---------------------------------------------------------------------------
// grade
// ---------------------------------------------------------------------------

void Pipeline::run_grade() {
  require_completed("decompose", "grade");
  if (manifest_.stage_completed("grade")) return;

  auto by_resp_sent = load_units_by_response(Granularity::Sentence);
  auto by_resp_claim = load_units_by_response(Granularity::Claim);
  const std::string grader_fp =
      fingerprint(json{{"provider", cfg_.providers.value("generation", json::object())},
                       {"protocol", "factscore"}});

  std::vector<json> grade_rows;
  std::vector<json> exception_rows;
  std::mutex mu;

  for (const auto& p : dataset_) {
    const std::string rid = response_id(p.prompt_id);
    for (Granularity g : {Granularity::Sentence, Granularity::Claim}) {
      if (!any_scorer(g)) continue;
      const auto& units = g == Granularity::Sentence ? by_resp_sent[rid] : by_resp_claim[rid];
      std::vector<std::optional<GradeRecord>> recs(units.size());
      parallel_for(units.size(), cfg_.parallelism, [&](size_t i) {
        const Unit& unit = units[i];
        try {
          if (trim(p.reference_text).empty())
            throw Error("no reference_text in dataset for prompt " + p.prompt_id);
          GradeRecord rec;
          rec.unit_id = unit.id;
          rec.grader_fp = grader_fp;
          rec.label = factscore_grade(providers_.generation(), prompts_, unit, p.reference_text);
          if (g == Granularity::Claim)
            rec.objectivity = classify_objectivity(providers_.generation(), prompts_, unit);
          recs[i] = std::move(rec);
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(mu);
          exception_rows.push_back(exception_row("grade", "", unit.id, e.what()));
        }
      });
      for (const auto& r : recs)
        if (r) grade_rows.push_back(r->to_json());
    }
  }

  JsonlWriter w(run_dir_ / artifact::kGrades, false);
  for (const auto& r : grade_rows) w.write(r);
  JsonlWriter ex(run_dir_ / "grade_exceptions.jsonl", false);
  for (const auto& r : exception_rows) ex.write(r);
  manifest_.mark_stage("grade", {artifact::kGrades, "grade_exceptions.jsonl"}, run_dir_);
  std::cerr << "[grade] " << grade_rows.size() << " units graded, " << exception_rows.size()
            << " excluded\n";
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

namespace {

std::string fmt_metric(const std::optional<double>& v) {
  if (!v) return "   absent";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%9.4f", *v);
  return buf;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%9.4f", v);
  return buf;
}

}  // namespace

void Pipeline::run_evaluate() {
  require_completed("score", "evaluate");
  require_completed("aggregate", "evaluate");
  require_completed("grade", "evaluate");
  if (manifest_.stage_completed("evaluate")) return;

  auto by_resp_sent = load_units_by_response(Granularity::Sentence);
  auto by_resp_claim = load_units_by_response(Granularity::Claim);

  std::map<std::string, GradeRecord> grades;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kGrades)) {
    GradeRecord g = GradeRecord::from_json(rec);
    grades[g.unit_id] = std::move(g);
  }
  std::map<std::string, std::map<std::string, double>> scores_by_scorer;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kScores)) {
    ScoreRecord r = ScoreRecord::from_json(rec);
    ScorerConfig key;
    key.family = r.family;
    key.granularity = r.granularity;
    key.signal = r.signal;
    scores_by_scorer[scorer_key(key)][r.unit_id] = r.score;
  }
  // config_fp -> response_id -> mean aggregate (non-UAD rows)
  std::map<std::string, std::map<std::string, double>> avg_by_fp;
  for (const auto& rec : read_jsonl(run_dir_ / artifact::kResponseScores)) {
    if (rec.contains("tau")) continue;
    if (rec.at("aggregate").is_null()) continue;
    avg_by_fp[rec.at("config_fp").get<std::string>()][rec.at("response_id").get<std::string>()] =
        rec.at("aggregate").get<double>();
  }

  // A unit participates in claim-level evaluation only when graded objective;
  // sentence-level evaluation keeps every graded sentence.
  auto eligible = [&](const Unit& u) -> std::optional<int> {
    auto it = grades.find(u.id);
    if (it == grades.end() || !it->second.label) return std::nullopt;
    if (u.granularity == Granularity::Claim && it->second.objectivity &&
        *it->second.objectivity == Objectivity::Subjective)
      return std::nullopt;
    return *it->second.label == FactLabel::Supported ? 1 : 0;
  };

  json unit_rows = json::array();
  json response_rows = json::array();
  json uad_rows = json::array();
  std::map<std::string, std::pair<long, long>> baseline;  // granularity -> (supported, graded)

  for (const auto& p : dataset_) {
    const std::string rid = response_id(p.prompt_id);
    for (Granularity g : {Granularity::Sentence, Granularity::Claim}) {
      if (!any_scorer(g)) continue;
      const auto& units = g == Granularity::Sentence ? by_resp_sent[rid] : by_resp_claim[rid];
      for (const auto& u : units)
        if (auto label = eligible(u)) {
          auto& [supported, total] = baseline[to_string(g)];
          supported += *label;
          total += 1;
        }
    }
  }

  for (const auto& scorer : cfg_.scorers) {
    const auto& unit_scores = scores_by_scorer[scorer_key(scorer)];
    std::vector<double> xs;
    std::vector<int> ys;
    std::vector<double> resp_scores, resp_grades;
    for (const auto& p : dataset_) {
      const std::string rid = response_id(p.prompt_id);
      const auto& units = scorer.granularity == Granularity::Sentence ? by_resp_sent[rid]
                                                                      : by_resp_claim[rid];
      long supported = 0, graded = 0;
      for (const auto& u : units) {
        auto label = eligible(u);
        if (!label) continue;
        auto it = unit_scores.find(u.id);
        if (it == unit_scores.end()) continue;
        xs.push_back(it->second);
        ys.push_back(*label);
        supported += *label;
        graded += 1;
      }
      auto fp_scores = avg_by_fp.find(scorer.fingerprint());
      if (graded > 0 && fp_scores != avg_by_fp.end()) {
        auto rit = fp_scores->second.find(rid);
        if (rit != fp_scores->second.end()) {
          resp_scores.push_back(rit->second);
          resp_grades.push_back(static_cast<double>(supported) / static_cast<double>(graded));
        }
      }
    }

    json row{{"scorer", scorer.name()},
             {"family", to_string(scorer.family)},
             {"granularity", to_string(scorer.granularity)},
             {"eta", to_string(scorer.signal)},
             {"n", xs.size()}};
    auto roc = auroc(xs, ys);
    auto prc = auprc(xs, ys);
    row["auroc"] = roc ? json(*roc) : json(nullptr);
    row["auprc"] = prc ? json(*prc) : json(nullptr);
    if (!xs.empty()) {
      auto cal = expected_calibration_error(xs, ys, cfg_.ece_bins);
      row["ece"] = cal.ece;
      json bins = json::array();
      for (const auto& b : cal.bins)
        if (b.count > 0) bins.push_back(b.to_json());
      row["ece_bins"] = bins;
      row["brier"] = brier_score(xs, ys);
    } else {
      row["ece"] = nullptr;
      row["ece_bins"] = json::array();
      row["brier"] = nullptr;
    }
    unit_rows.push_back(row);

    auto pr = pearson(resp_scores, resp_grades);
    auto sp = spearman(resp_scores, resp_grades);
    response_rows.push_back(json{{"scorer", scorer.name()},
                                 {"n", resp_scores.size()},
                                 {"pearson", pr ? json(*pr) : json(nullptr)},
                                 {"spearman", sp ? json(*sp) : json(nullptr)}});

    // Accuracy of the retained set across the percentile threshold grid,
    // claim-level scorers only.
    if (scorer.granularity == Granularity::Claim && !xs.empty()) {
      for (double q : cfg_.percentiles) {
        double tau = percentile_threshold(xs, q);
        long retained = 0, correct = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
          if (xs[i] > tau) {
            ++retained;
            correct += ys[i];
          }
        }
        json urow{{"scorer", scorer.name()}, {"percentile", q}, {"tau", tau},
                  {"n_retained", retained}};
        urow["accuracy"] = retained > 0
                               ? json(static_cast<double>(correct) / static_cast<double>(retained))
                               : json(nullptr);
        uad_rows.push_back(std::move(urow));
      }
    }
  }

  json baseline_json = json::object();
  for (const auto& [g, counts] : baseline)
    baseline_json[g] = counts.second > 0 ? json(static_cast<double>(counts.first) /
                                                static_cast<double>(counts.second))
                                         : json(nullptr);

  json report{{"unit_level", unit_rows},
              {"response_level", response_rows},
              {"uad_curve", uad_rows},
              {"baseline_accuracy", baseline_json},
              {"config_fingerprint", cfg_.fingerprint()}};
  write_text_file(run_dir_ / artifact::kReportJson, report.dump(2) + "\n");

  // Plain-text tables.
  std::ostringstream txt;
  txt << "Unit-level metrics\n";
  txt << "scorer                                          n     AUROC     AUPRC       ECE     Brier\n";
  for (const auto& r : unit_rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-42s %5ld", r.at("scorer").get<std::string>().c_str(),
                  r.at("n").get<long>());
    txt << line;
    auto opt = [&](const char* k) -> std::optional<double> {
      return r.at(k).is_null() ? std::nullopt : std::optional<double>(r.at(k).get<double>());
    };
    txt << " " << fmt_metric(opt("auroc")) << " " << fmt_metric(opt("auprc")) << " "
        << fmt_metric(opt("ece")) << " " << fmt_metric(opt("brier")) << "\n";
  }
  txt << "\nResponse-level correlations\n";
  txt << "scorer                                          n   Pearson  Spearman\n";
  for (const auto& r : response_rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-42s %5ld", r.at("scorer").get<std::string>().c_str(),
                  r.at("n").get<long>());
    txt << line;
    auto opt = [&](const char* k) -> std::optional<double> {
      return r.at(k).is_null() ? std::nullopt : std::optional<double>(r.at(k).get<double>());
    };
    txt << " " << fmt_metric(opt("pearson")) << " " << fmt_metric(opt("spearman")) << "\n";
  }
  txt << "\nUAD retained-claim accuracy by percentile threshold\n";
  txt << "scorer                                     pct       tau  retained  accuracy\n";
  for (const auto& r : uad_rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-42s %3.0f %s %9ld",
                  r.at("scorer").get<std::string>().c_str(), r.at("percentile").get<double>(),
                  fmt_num(r.at("tau").get<double>()).c_str(), r.at("n_retained").get<long>());
    txt << line << " ";
    txt << (r.at("accuracy").is_null() ? "   absent" : fmt_num(r.at("accuracy").get<double>()));
    txt << "\n";
  }
  write_text_file(run_dir_ / artifact::kReportText, txt.str());

  manifest_.mark_stage("evaluate", {artifact::kReportJson, artifact::kReportText}, run_dir_);
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

json Pipeline::run_audit() {
  require_completed("score", "audit");
  if (cfg_.uad) require_completed("aggregate", "audit");

  json counters_json = json::parse(read_text_file(run_dir_ / artifact::kCounters));
  auto meta = load_prompt_meta();

  json rows = json::array();
  std::vector<std::string> mismatches;
  for (const auto& scorer : cfg_.scorers) {
    // No cost row: verbalized scoring, and negentropy whose clustering
    // comparison count is data-dependent rather than m_qa per question.
    if (scorer.family == ScorerFamily::Verbalized) continue;
    if (scorer.signal == ScoreSignal::Negentropy) continue;
    CostFamily family = cost_family(scorer.family, scorer.granularity);
    const bool uad = cfg_.uad && scorer.granularity == Granularity::Claim;
    CostEstimate expected;
    for (const auto& p : dataset_) {
      auto it = meta.find(p.prompt_id);
      if (it == meta.end()) continue;
      auto est = cost_model(family, cfg_.effective_m(scorer), cfg_.effective_m_qa(scorer),
                            cfg_.effective_q(scorer), it->second.n_claim, it->second.n_sent,
                            it->second.n_union, uad);
      expected.comparisons += est.comparisons;
      expected.generations += est.generations;
    }
    const auto& c = counters_json.at("scorers").at(scorer.fingerprint()).at("counters");
    long actual_comparisons = c.at("comparisons").get<long>();
    long actual_generations = c.at("generations_total").get<long>();
    bool match = actual_comparisons == expected.comparisons &&
                 actual_generations == expected.generations;
    rows.push_back(json{{"scorer", scorer.name()},
                        {"cost_family", to_string(family)},
                        {"expected", expected.to_json()},
                        {"actual",
                         json{{"comparisons", actual_comparisons},
                              {"generations", actual_generations}}},
                        {"match", match}});
    if (!match) {
      std::ostringstream msg;
      msg << scorer.name() << ": expected " << expected.comparisons << " comparisons / "
          << expected.generations << " generations, observed " << actual_comparisons << " / "
          << actual_generations;
      mismatches.push_back(msg.str());
    }
  }

  json report{{"rows", rows}, {"ok", mismatches.empty()}};
  write_text_file(run_dir_ / artifact::kAudit, report.dump(2) + "\n");
  if (!mismatches.empty()) {
    std::string msg = "cost-model audit failed:";
    for (const auto& m : mismatches) msg += "\n  " + m;
    throw AuditError(msg);
  }
  return report;
}

void Pipeline::run_all() {
  run_generate();
  run_decompose();
  run_score();
  run_aggregate();
  run_grade();
  run_evaluate();
}

}  // namespace credence
