#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/providers/clients.hpp"
#include "credence/scorers/config.hpp"

namespace credence {

struct RunConfig {
  std::filesystem::path base_dir;  // directory of the config file; relative paths resolve here

  std::string dataset;
  std::string run_dir;
  ReplayMode replay_mode = ReplayMode::StrictReplay;
  std::string replay_store;

  int m = 10;
  int m_qa = 5;
  int q = 1;
  double temperature = 1.0;
  double tau_claim = 0.5;
  std::vector<double> percentiles = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  bool uad = false;

  double entail_threshold = 0.5;
  double edge_threshold = 0.5;
  double pagerank_damping = 0.85;
  int ece_bins = 10;
  long seed = 0;
  int parallelism = 8;

  nlohmann::json providers;  // raw provider blocks
  std::vector<ScorerConfig> scorers;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const nlohmann::json& j, const std::filesystem::path& base_dir);

  // Scorer-relevant knobs only; changing any of them changes the fingerprint
  // and therefore the artifact set.
  nlohmann::json fingerprint_material() const;
  std::string fingerprint() const;

  std::filesystem::path dataset_path() const { return resolve(dataset); }
  std::filesystem::path run_dir_path() const { return resolve(run_dir); }
  std::filesystem::path replay_store_path() const { return resolve(replay_store); }

  int effective_m(const ScorerConfig& s) const { return s.m > 0 ? s.m : m; }
  int effective_m_qa(const ScorerConfig& s) const { return s.m_qa > 0 ? s.m_qa : m_qa; }
  int effective_q(const ScorerConfig& s) const { return s.q > 0 ? s.q : q; }

 private:
  std::filesystem::path resolve(const std::string& p) const;
};

}  // namespace credence
