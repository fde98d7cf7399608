#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "credence/errors.hpp"
#include "credence/pipeline/stages.hpp"

namespace {

using credence::ScorerConfig;

// --scorers / --granularity narrow the configured scorer list. Needle matches
// a scorer when it equals the family, the "family/granularity/eta" name, or a
// substring of that name.
std::vector<ScorerConfig> filter_scorers(const std::vector<ScorerConfig>& scorers,
                                         const std::vector<std::string>& needles,
                                         const std::string& granularity) {
  std::vector<ScorerConfig> out;
  for (const auto& s : scorers) {
    if (!granularity.empty() && credence::to_string(s.granularity) != granularity) continue;
    if (!needles.empty()) {
      bool hit = false;
      for (const auto& n : needles)
        if (s.name().find(n) != std::string::npos || credence::to_string(s.family) == n) {
          hit = true;
          break;
        }
      if (!hit) continue;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fine-grained confidence scoring for long-form LLM responses"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir_override;
  std::string replay_mode_override;
  std::string granularity_filter;
  std::vector<std::string> scorer_filter;
  double tau_override = -1.0;
  std::vector<double> percentile_override;

  app.add_option("--config", config_path, "Run config JSON file")->required();
  app.add_option("--run-dir", run_dir_override, "Override the run directory");
  app.add_option("--replay-mode", replay_mode_override, "record|strict_replay|live");
  app.add_option("--scorers", scorer_filter, "Only run matching scorers (family or name substring)")
      ->delimiter(',');
  app.add_option("--granularity", granularity_filter, "Only run scorers at sent|claim granularity");
  app.add_option("--tau", tau_override, "Override the UAD claim threshold");
  app.add_option("--percentiles", percentile_override, "Override the evaluation percentile grid")
      ->delimiter(',');

  auto* cmd_generate = app.add_subcommand("generate", "Sample the original and candidate responses");
  auto* cmd_decompose = app.add_subcommand("decompose", "Split responses into sentences/claims");
  auto* cmd_score = app.add_subcommand("score", "Compute unit-level confidence scores");
  auto* cmd_aggregate = app.add_subcommand("aggregate", "Response-level aggregation and UAD");
  auto* cmd_grade = app.add_subcommand("grade", "FactScore grading against reference texts");
  auto* cmd_evaluate = app.add_subcommand("evaluate", "Classification/calibration/correlation report");
  auto* cmd_audit = app.add_subcommand("audit", "Check instrumented counters against the cost model");

  CLI11_PARSE(app, argc, argv);

  try {
    credence::RunConfig cfg = credence::RunConfig::load(config_path);
    if (!run_dir_override.empty()) cfg.run_dir = run_dir_override;
    if (!replay_mode_override.empty()) cfg.replay_mode = credence::parse_replay_mode(replay_mode_override);
    if (tau_override >= 0.0) cfg.tau_claim = tau_override;
    if (!percentile_override.empty()) cfg.percentiles = percentile_override;
    if (!scorer_filter.empty() || !granularity_filter.empty()) {
      cfg.scorers = filter_scorers(cfg.scorers, scorer_filter, granularity_filter);
      if (cfg.scorers.empty())
        throw credence::ConfigError("scorer filter matched none of the configured scorers");
    }

    credence::ProviderSetOptions opts;
    opts.mode = cfg.replay_mode;
    opts.replay_store = cfg.replay_mode == credence::ReplayMode::Live
                            ? ""
                            : cfg.replay_store_path().string();
    credence::ProviderSet providers(cfg.providers, opts);
    credence::Pipeline pipeline(std::move(cfg), providers);

    if (cmd_generate->parsed()) pipeline.run_generate();
    if (cmd_decompose->parsed()) pipeline.run_decompose();
    if (cmd_score->parsed()) pipeline.run_score();
    if (cmd_aggregate->parsed()) pipeline.run_aggregate();
    if (cmd_grade->parsed()) pipeline.run_grade();
    if (cmd_evaluate->parsed()) pipeline.run_evaluate();
    if (cmd_audit->parsed()) {
      auto report = pipeline.run_audit();
      std::cout << report.dump(2) << "\n";
    }
    return 0;
  } catch (const credence::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const credence::AuditError& e) {
    std::cerr << "audit failure: " << e.what() << "\n";
    return 4;
  } catch (const credence::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
