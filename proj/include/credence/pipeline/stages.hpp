#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/pipeline/counters.hpp"
#include "credence/pipeline/dataset.hpp"
#include "credence/pipeline/manifest.hpp"
#include "credence/pipeline/run_config.hpp"
#include "credence/providers/clients.hpp"
#include "credence/providers/prompts.hpp"

namespace credence {

namespace artifact {
inline constexpr const char* kResponses = "responses.jsonl";
inline constexpr const char* kUnits = "units.jsonl";
inline constexpr const char* kUnion = "union.jsonl";
inline constexpr const char* kPromptMeta = "prompt_meta.jsonl";
inline constexpr const char* kScores = "scores.jsonl";
inline constexpr const char* kGraph = "graph.jsonl";
inline constexpr const char* kCentrality = "centrality.jsonl";
inline constexpr const char* kCounters = "counters.json";
inline constexpr const char* kExceptions = "exceptions.jsonl";
inline constexpr const char* kResponseScores = "response_scores.jsonl";
inline constexpr const char* kReconstructions = "reconstructions.jsonl";
inline constexpr const char* kGrades = "grades.jsonl";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kAudit = "audit.json";
}  // namespace artifact

// Staged pipeline over a run directory. Stages are idempotent: a completed
// stage (recorded in the manifest) is skipped on re-entry, so a run can be
// killed between stages and resumed without changing any artifact bytes.
class Pipeline {
 public:
  Pipeline(RunConfig cfg, ProviderSet& providers);

  void run_generate();
  void run_decompose();
  void run_score();
  void run_aggregate();
  void run_grade();
  void run_evaluate();

  // Compares instrumented counters against the cost model; writes audit.json
  // and throws AuditError when any scorer's counters disagree.
  nlohmann::json run_audit();

  void run_all();

  const RunConfig& config() const { return cfg_; }
  std::filesystem::path artifact_path(const char* name) const;
  const RunManifest& manifest() const { return manifest_; }

 private:
  struct ResponseSet {
    std::string prompt_id;
    std::string original_id;
    std::string original;
    std::vector<std::string> sample_ids;
    std::vector<std::string> samples;
  };

  struct PromptMeta {
    long n_sent = 0;
    long n_claim = 0;
    long n_union = 0;
  };

  void require_completed(const std::string& stage, const std::string& for_stage) const;

  std::string response_id(const std::string& prompt_id) const { return prompt_id + "/orig"; }
  std::string sample_id(const std::string& prompt_id, int j) const {
    return prompt_id + "/s" + std::to_string(j + 1);
  }

  std::vector<ResponseSet> load_responses() const;
  std::map<std::string, Unit> load_units() const;               // id -> unit
  std::map<std::string, std::vector<Unit>> load_units_by_response(Granularity g) const;
  std::map<std::string, ClaimUnion> load_unions(const std::map<std::string, Unit>& units) const;
  std::map<std::string, PromptMeta> load_prompt_meta() const;

  bool any_scorer(Granularity g) const;
  bool has_family(ScorerFamily f) const;

  RunConfig cfg_;
  ProviderSet& providers_;
  PromptLibrary prompts_;
  std::vector<PromptRecord> dataset_;
  RunManifest manifest_;
  std::filesystem::path run_dir_;
};

}  // namespace credence
