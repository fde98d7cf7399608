#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <memory>

#include "credence/errors.hpp"
#include "credence/evaluation/grading.hpp"
#include "credence/jsonl.hpp"
#include "credence/pipeline/stages.hpp"
#include "support/scenario.hpp"

using namespace credence;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() /
             ("credence_pipe_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_dataset(const fs::path& dir) {
  JsonlWriter w(dir / "prompts.jsonl", false);
  for (const auto& row : scenario::dataset_rows()) w.write(row);
}

// Records one fixture run against the scripted transport.
void record_run(const scenario::NamedRunConfig& run, const fs::path& base,
                const fs::path& store, const fs::path& run_dir) {
  json cfg_json = run.config;
  cfg_json["replay_mode"] = "record";
  cfg_json["providers"] = scenario::provider_blocks(true);
  cfg_json["run_dir"] = run_dir.string();
  RunConfig cfg = RunConfig::parse(cfg_json, base);

  ProviderSetOptions opts;
  opts.mode = ReplayMode::Record;
  opts.replay_store = store.string();
  opts.transport_factory = [] { return std::make_shared<scenario::ScriptedTransport>(); };
  opts.clock = [] { return std::string("2025-01-01T00:00:00Z"); };
  ProviderSet providers(cfg.providers, opts);
  Pipeline pipeline(std::move(cfg), providers);
  if (run.full_pipeline) {
    pipeline.run_all();
  } else {
    pipeline.run_generate();
    pipeline.run_decompose();
    pipeline.run_score();
    if (run.needs_aggregate) pipeline.run_aggregate();
  }
  pipeline.run_audit();
}

scenario::NamedRunConfig e2e_run() {
  for (auto& run : scenario::fixture_run_configs())
    if (run.full_pipeline) return run;
  throw Error("no e2e fixture config");
}

struct StrictRun {
  std::unique_ptr<ProviderSet> providers;
  std::unique_ptr<Pipeline> pipeline;
};

StrictRun strict_pipeline(const json& config, const fs::path& base, const fs::path& store,
                          const fs::path& run_dir) {
  json cfg_json = config;
  cfg_json["run_dir"] = run_dir.string();
  RunConfig cfg = RunConfig::parse(cfg_json, base);
  ProviderSetOptions opts;
  opts.mode = ReplayMode::StrictReplay;
  opts.replay_store = store.string();
  StrictRun out;
  out.providers = std::make_unique<ProviderSet>(cfg.providers, opts);
  out.pipeline = std::make_unique<Pipeline>(std::move(cfg), *out.providers);
  return out;
}

std::vector<std::string> artifact_files() {
  return {artifact::kResponses,     artifact::kUnits,           artifact::kUnion,
          artifact::kPromptMeta,    artifact::kScores,          artifact::kGraph,
          artifact::kCentrality,    artifact::kCounters,        artifact::kExceptions,
          artifact::kResponseScores, artifact::kReconstructions, artifact::kGrades,
          artifact::kReportJson,    artifact::kReportText};
}

void check_dirs_identical(const fs::path& a, const fs::path& b) {
  for (const auto& f : artifact_files()) {
    bool in_a = fs::exists(a / f), in_b = fs::exists(b / f);
    CHECK(in_a == in_b);
    if (in_a && in_b) {
      INFO("artifact ", f);
      CHECK(read_text_file(a / f) == read_text_file(b / f));
    }
  }
}

}  // namespace

TEST_CASE("dataset loader validates schema with line numbers") {
  auto dir = fresh_dir("dataset");
  write_text_file(dir / "ok.jsonl",
                  R"({"prompt_id":"a","prompt":"P1"})"
                  "\n"
                  R"({"prompt_id":"b","prompt":"P2","reference_text":"ref"})"
                  "\n"
                  R"({"prompt_id":"c","prompt":"P3"})"
                  "\n");
  auto prompts = load_dataset(dir / "ok.jsonl");
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[1].reference_text == "ref");

  write_text_file(dir / "bad.jsonl", R"({"prompt_id":"a"})" "\n");
  try {
    load_dataset(dir / "bad.jsonl");
    FAIL("expected config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
    CHECK(std::string(e.what()).find("prompt") != std::string::npos);
  }

  write_text_file(dir / "empty.jsonl", "");
  CHECK(load_dataset(dir / "empty.jsonl").empty());

  write_text_file(dir / "dup.jsonl",
                  R"({"prompt_id":"a","prompt":"P1"})"
                  "\n"
                  R"({"prompt_id":"a","prompt":"P2"})"
                  "\n");
  CHECK_THROWS_AS(load_dataset(dir / "dup.jsonl"), ConfigError);
}

TEST_CASE("inadmissible scorers are rejected before any work") {
  auto dir = fresh_dir("reject");
  write_dataset(dir);
  json cfg = e2e_run().config;
  cfg["scorers"].push_back({{"family", "graph_based"}, {"granularity", "sent"},
                            {"eta", "closeness"}});
  CHECK_THROWS_AS(RunConfig::parse(cfg, dir), ConfigError);
}

TEST_CASE("config fingerprints track scorer-relevant knobs") {
  auto dir = fresh_dir("fp");
  json base = e2e_run().config;
  RunConfig a = RunConfig::parse(base, dir);
  json changed = base;
  changed["m"] = 7;
  RunConfig b = RunConfig::parse(changed, dir);
  CHECK(a.fingerprint() != b.fingerprint());
  json same = base;
  same["run_dir"] = "elsewhere";  // not scorer-relevant
  CHECK(RunConfig::parse(same, dir).fingerprint() == a.fingerprint());
}

TEST_CASE("end-to-end record run produces the expected artifact shapes") {
  auto dir = fresh_dir("record_e2e");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  record_run(e2e_run(), dir, store, dir / "run");

  auto responses = read_jsonl(dir / "run" / artifact::kResponses);
  REQUIRE(responses.size() == 2);
  for (const auto& r : responses) {
    CHECK(r.at("samples").size() == scenario::kSamples);
    CHECK(!r.at("original").get<std::string>().empty());
  }

  auto meta = read_jsonl(dir / "run" / artifact::kPromptMeta);
  REQUIRE(meta.size() == 2);
  for (const auto& m : meta) {
    CHECK(m.at("n_sent").get<long>() == scenario::kSentencesPerResponse);
    CHECK(m.at("n_claim").get<long>() == scenario::kClaimsPerResponse);
    CHECK(m.at("n_union").get<long>() == scenario::kUnionClaims);
    // union growth stays within the observed 2x-5x band of per-response claims
    double factor = static_cast<double>(m.at("n_union").get<long>()) /
                    static_cast<double>(m.at("n_claim").get<long>());
    CHECK(factor >= 2.0);
    CHECK(factor <= 5.0);
  }

  auto unions = read_jsonl(dir / "run" / artifact::kUnion);
  REQUIRE(unions.size() == 2);
  for (const auto& u : unions) CHECK(u.at("claim_ids").size() == scenario::kUnionClaims);

  // per scorer: unit_response 5 claims, matched 2 sents, unit_qa 5 claims,
  // graph 15 union claims; times two prompts
  auto scores = read_jsonl(dir / "run" / artifact::kScores);
  CHECK(scores.size() == 2 * (5 + 2 + 5 + 15));
  for (const auto& s : scores) {
    double v = s.at("score").get<double>();
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  auto grades = read_jsonl(dir / "run" / artifact::kGrades);
  CHECK(grades.size() == 2 * (5 + 2));
  int subjective = 0;
  for (const auto& g : grades)
    if (g.at("objectivity").is_string() && g.at("objectivity") == "subjective") ++subjective;
  CHECK(subjective == 2);  // one scripted subjective claim per prompt

  // A_avg rows for all four scorers, UAD rows for the three claim scorers
  auto response_scores = read_jsonl(dir / "run" / artifact::kResponseScores);
  CHECK(response_scores.size() == 2 * 4 + 2 * 3);
  int uad_rows = 0;
  for (const auto& r : response_scores) {
    if (!r.contains("tau")) continue;
    ++uad_rows;
    CHECK(!r.at("retained_unit_ids").empty());
  }
  CHECK(uad_rows == 6);

  auto reconstructions = read_jsonl(dir / "run" / artifact::kReconstructions);
  CHECK(reconstructions.size() == 6);
  for (const auto& r : reconstructions)
    CHECK(r.at("text").get<std::string>().find("rewritten") != std::string::npos);

  auto report = json::parse(read_text_file(dir / "run" / artifact::kReportJson));
  CHECK(report.at("unit_level").size() == 4);
  CHECK(report.at("response_level").size() == 4);
  CHECK(!report.at("uad_curve").empty());
  CHECK(read_jsonl(dir / "run" / artifact::kExceptions).empty());

  auto audit = json::parse(read_text_file(dir / "run" / artifact::kAudit));
  CHECK(audit.at("ok") == true);
}

TEST_CASE("strict replay runs are byte-identical and fully offline") {
  auto dir = fresh_dir("replay_det");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  record_run(e2e_run(), dir, store, dir / "record_run");

  auto run_a = strict_pipeline(e2e_run().config, dir, store, dir / "a");
  run_a.pipeline->run_all();
  CHECK(run_a.providers->network_ops() == 0);

  auto run_b = strict_pipeline(e2e_run().config, dir, store, dir / "b");
  run_b.pipeline->run_all();
  CHECK(run_b.providers->network_ops() == 0);

  check_dirs_identical(dir / "a", dir / "b");

  // resume after a kill between stages: run the first stages in one process
  // lifetime, then finish in a fresh pipeline over the same run directory
  auto first = strict_pipeline(e2e_run().config, dir, store, dir / "c");
  first.pipeline->run_generate();
  first.pipeline->run_decompose();
  first.pipeline.reset();
  first.providers.reset();

  auto resumed = strict_pipeline(e2e_run().config, dir, store, dir / "c");
  resumed.pipeline->run_all();
  CHECK(resumed.providers->network_ops() == 0);
  check_dirs_identical(dir / "a", dir / "c");
}

TEST_CASE("parallel strict replay is byte-identical to serial") {
  auto dir = fresh_dir("parallel");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  record_run(e2e_run(), dir, store, dir / "seed");

  auto serial = strict_pipeline(e2e_run().config, dir, store, dir / "serial");
  serial.pipeline->run_all();

  json wide_cfg = e2e_run().config;
  wide_cfg["parallelism"] = 8;  // not a scorer-relevant knob: same fingerprint
  auto parallel = strict_pipeline(wide_cfg, dir, store, dir / "parallel");
  parallel.pipeline->run_all();
  CHECK(parallel.providers->network_ops() == 0);

  check_dirs_identical(dir / "serial", dir / "parallel");
}

TEST_CASE("completed stages are skipped on re-entry") {
  auto dir = fresh_dir("skip");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  record_run(e2e_run(), dir, store, dir / "seed");

  auto run = strict_pipeline(e2e_run().config, dir, store, dir / "run");
  run.pipeline->run_generate();
  auto checksum = sha256_file(dir / "run" / artifact::kResponses);
  auto before = run.providers->stats_json();
  run.pipeline->run_generate();  // no-op
  CHECK(sha256_file(dir / "run" / artifact::kResponses) == checksum);
  CHECK(run.providers->stats_json() == before);
}

TEST_CASE("re-running aggregate over already-updated counters is idempotent") {
  auto dir = fresh_dir("agg_idem");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  record_run(e2e_run(), dir, store, dir / "seed");

  auto run = strict_pipeline(e2e_run().config, dir, store, dir / "run");
  run.pipeline->run_generate();
  run.pipeline->run_decompose();
  run.pipeline->run_score();
  run.pipeline->run_aggregate();
  auto counters_after = read_text_file(dir / "run" / artifact::kCounters);

  // simulate a kill after the counters write but before the stage marker:
  // drop the marker and run the stage again over the updated counters
  auto manifest_path = dir / "run" / "manifest.json";
  json manifest = json::parse(read_text_file(manifest_path));
  manifest["stages"].erase("aggregate");
  write_text_file(manifest_path, manifest.dump(2) + "\n");

  auto rerun = strict_pipeline(e2e_run().config, dir, store, dir / "run");
  rerun.pipeline->run_aggregate();
  CHECK(read_text_file(dir / "run" / artifact::kCounters) == counters_after);
  CHECK_NOTHROW(rerun.pipeline->run_audit());
}

TEST_CASE("a run directory refuses a different config fingerprint") {
  auto dir = fresh_dir("mix");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  record_run(e2e_run(), dir, store, dir / "seed");

  auto run = strict_pipeline(e2e_run().config, dir, store, dir / "run");
  run.pipeline->run_generate();

  json changed = e2e_run().config;
  changed["m"] = 9;
  changed["run_dir"] = (dir / "run").string();
  RunConfig cfg = RunConfig::parse(changed, dir);
  ProviderSetOptions opts;
  opts.mode = ReplayMode::StrictReplay;
  opts.replay_store = store.string();
  ProviderSet providers(cfg.providers, opts);
  CHECK_THROWS_AS(Pipeline(std::move(cfg), providers), ConfigError);
}

TEST_CASE("stage prerequisites are enforced") {
  auto dir = fresh_dir("prereq");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  write_text_file(store, "");
  auto run = strict_pipeline(e2e_run().config, dir, store, dir / "run");
  CHECK_THROWS_AS(run.pipeline->run_score(), ConfigError);
  CHECK_THROWS_AS(run.pipeline->run_evaluate(), ConfigError);
}

TEST_CASE("strict replay misses name the absent key") {
  auto dir = fresh_dir("miss");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  write_text_file(store, "");  // empty store: everything misses
  auto run = strict_pipeline(e2e_run().config, dir, store, dir / "run");
  try {
    run.pipeline->run_generate();
    FAIL("expected a replay miss");
  } catch (const ProviderError& e) {
    CHECK(std::string(e.what()).find("replay miss") != std::string::npos);
  }
}

TEST_CASE("single-family cost audits hold for every costed family") {
  auto dir = fresh_dir("audits");
  write_dataset(dir);
  auto store = dir / "store.jsonl";
  for (const auto& run : scenario::fixture_run_configs()) {
    if (run.full_pipeline) continue;
    INFO("audit run ", run.name);
    CHECK_NOTHROW(record_run(run, dir, store, dir / run.name));
    auto audit = json::parse(read_text_file(dir / run.name / artifact::kAudit));
    CHECK(audit.at("ok") == true);
  }
}

TEST_CASE("verbalized scorers flow through the pipeline") {
  auto dir = fresh_dir("verbalized");
  write_dataset(dir);
  scenario::NamedRunConfig run;
  run.name = "verbalized";
  run.config = e2e_run().config;
  run.config["uad"] = false;
  run.config["scorers"] =
      json::array({{{"family", "verbalized"}, {"granularity", "claim"}}});
  record_run(run, dir, dir / "store.jsonl", dir / "run");

  auto scores = read_jsonl(dir / "run" / artifact::kScores);
  REQUIRE(scores.size() == 2 * 5);
  for (const auto& s : scores) {
    CHECK(s.at("family") == "verbalized");
    double v = s.at("score").get<double>();
    CHECK(v >= 0.1);
    CHECK(v <= 1.0);
  }
  // verbalized has no cost-model row and must not fail the audit
  auto audit = json::parse(read_text_file(dir / "run" / artifact::kAudit));
  CHECK(audit.at("rows").empty());
}

TEST_CASE("duplicate scorer triples are rejected") {
  auto dir = fresh_dir("dup_scorer");
  json cfg = e2e_run().config;
  cfg["scorers"].push_back(cfg["scorers"][0]);
  CHECK_THROWS_AS(RunConfig::parse(cfg, dir), ConfigError);
}

TEST_CASE("objectivity fixtures classify the canonical wordings") {
  auto dir = fresh_dir("objectivity");
  auto transport = std::make_shared<scenario::ScriptedTransport>();
  json blocks{{"generation", {{"kind", "generation"}, {"url", "http://sim.local/v1/chat"}}}};
  ProviderSetOptions opts;
  opts.mode = ReplayMode::Record;
  opts.replay_store = (dir / "s.jsonl").string();
  opts.transport_factory = [transport] { return std::static_pointer_cast<Transport>(transport); };
  ProviderSet set(blocks, opts);

  PromptLibrary lib;
  Unit factual;
  factual.id = "u1";
  factual.text = "X was born in 1930.";
  factual.granularity = Granularity::Claim;
  factual.source_response = "orig";
  CHECK(classify_objectivity(set.generation(), lib, factual) == Objectivity::Objective);

  Unit opinion = factual;
  opinion.id = "u2";
  opinion.text = "X is the greatest.";
  CHECK(classify_objectivity(set.generation(), lib, opinion) == Objectivity::Subjective);
}

TEST_CASE("negentropy scoring runs through the pipeline") {
  auto dir = fresh_dir("negentropy");
  write_dataset(dir);
  scenario::NamedRunConfig run;
  run.name = "negentropy";
  run.config = e2e_run().config;
  run.config["uad"] = false;
  run.config["scorers"] =
      json::array({{{"family", "unit_qa"}, {"granularity", "claim"}, {"eta", "negentropy"},
                    {"q", 1}}});
  record_run(run, dir, dir / "store.jsonl", dir / "run");

  auto scores = read_jsonl(dir / "run" / artifact::kScores);
  REQUIRE(scores.size() == 2 * 5);
  bool saw_high = false, saw_low = false;
  for (const auto& s : scores) {
    double v = s.at("score").get<double>();
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (v > 0.9) saw_high = true;
    if (v < 0.2) saw_low = true;
  }
  // consistent units cluster together (1.0); dispersed ones shatter into
  // near-singletons (the original can coincide with one sampled answer)
  CHECK(saw_high);
  CHECK(saw_low);
}

TEST_CASE("committed fixtures replay the full pipeline offline") {
  const fs::path fixture_dir = CREDENCE_FIXTURE_DIR;
  REQUIRE(fs::exists(fixture_dir / "replay_store.jsonl"));
  REQUIRE(fs::exists(fixture_dir / "prompts.jsonl"));
  REQUIRE(fs::exists(fixture_dir / "e2e_config.json"));

  auto dir = fresh_dir("fixture_replay");
  json cfg = json::parse(read_text_file(fixture_dir / "e2e_config.json"));
  auto run = strict_pipeline(cfg, fixture_dir, fixture_dir / "replay_store.jsonl", dir / "run");
  run.pipeline->run_all();
  run.pipeline->run_audit();
  CHECK(run.providers->network_ops() == 0);
  CHECK(read_jsonl(dir / "run" / artifact::kScores).size() == 2 * (5 + 2 + 5 + 15));
}

TEST_CASE("committed fixtures match a fresh recording of the scripted world") {
  const fs::path fixture_dir = CREDENCE_FIXTURE_DIR;
  REQUIRE(fs::exists(fixture_dir / "replay_store.jsonl"));

  auto dir = fresh_dir("fixture_regen");
  write_dataset(dir);
  auto store = dir / "replay_store.jsonl";
  for (const auto& run : scenario::fixture_run_configs())
    record_run(run, dir, store, dir / "runs" / run.name);

  CHECK(read_text_file(store) == read_text_file(fixture_dir / "replay_store.jsonl"));
  CHECK(read_text_file(dir / "prompts.jsonl") ==
        read_text_file(fixture_dir / "prompts.jsonl"));
}
