#include "credence/pipeline/run_config.hpp"

#include <fstream>
#include <set>

#include "credence/errors.hpp"
#include "credence/hashing.hpp"
#include "credence/jsonl.hpp"

namespace credence {

using nlohmann::json;

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return parse(j, path.has_parent_path() ? path.parent_path() : ".");
}

RunConfig RunConfig::parse(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  c.dataset = j.value("dataset", "");
  c.run_dir = j.value("run_dir", "");
  if (c.dataset.empty()) throw ConfigError("run config: dataset is required");
  if (c.run_dir.empty()) throw ConfigError("run config: run_dir is required");
  c.replay_mode = parse_replay_mode(j.value("replay_mode", "strict_replay"));
  c.replay_store = j.value("replay_store", "");
  if (c.replay_mode != ReplayMode::Live && c.replay_store.empty())
    throw ConfigError("run config: replay_store is required in record/strict_replay modes");

  c.m = j.value("m", 10);
  c.m_qa = j.value("m_qa", 5);
  c.q = j.value("q", 1);
  c.temperature = j.value("temperature", 1.0);
  c.tau_claim = j.value("tau_claim", 0.5);
  if (j.contains("percentiles")) c.percentiles = j.at("percentiles").get<std::vector<double>>();
  c.uad = j.value("uad", false);
  c.entail_threshold = j.value("entail_threshold", 0.5);
  c.edge_threshold = j.value("edge_threshold", 0.5);
  c.pagerank_damping = j.value("pagerank_damping", 0.85);
  c.ece_bins = j.value("ece_bins", 10);
  c.seed = j.value("seed", 0L);
  c.parallelism = j.value("parallelism", 8);

  if (c.m < 1) throw ConfigError("run config: m must be >= 1");
  if (c.m_qa < 1) throw ConfigError("run config: m_qa must be >= 1");
  if (c.q < 1) throw ConfigError("run config: q must be >= 1");
  if (!(c.temperature >= 0.0)) throw ConfigError("run config: temperature must be >= 0");
  if (!(c.tau_claim >= 0.0 && c.tau_claim <= 1.0))
    throw ConfigError("run config: tau_claim must lie in [0,1]");
  for (double p : c.percentiles)
    if (!(p > 0.0 && p < 100.0))
      throw ConfigError("run config: percentiles must lie strictly between 0 and 100");
  if (c.ece_bins < 1) throw ConfigError("run config: ece_bins must be >= 1");
  if (c.parallelism < 1) throw ConfigError("run config: parallelism must be >= 1");

  c.providers = j.value("providers", json::object());
  if (j.contains("scorers")) {
    if (!j.at("scorers").is_array()) throw ConfigError("run config: scorers must be an array");
    std::set<std::string> names;
    for (const auto& s : j.at("scorers")) {
      ScorerConfig parsed = ScorerConfig::parse(s);
      // Score records are keyed by family/granularity/eta, so one scorer per
      // triple per run.
      if (!names.insert(parsed.name()).second)
        throw ConfigError("run config: duplicate scorer " + parsed.name());
      c.scorers.push_back(std::move(parsed));
    }
  }
  return c;
}

json RunConfig::fingerprint_material() const {
  json scorer_list = json::array();
  for (const auto& s : scorers) scorer_list.push_back(s.to_json());
  return json{{"dataset", dataset},
              {"providers", providers},
              {"scorers", scorer_list},
              {"m", m},
              {"m_qa", m_qa},
              {"q", q},
              {"temperature", temperature},
              {"tau_claim", tau_claim},
              {"percentiles", percentiles},
              {"uad", uad},
              {"entail_threshold", entail_threshold},
              {"edge_threshold", edge_threshold},
              {"pagerank_damping", pagerank_damping},
              {"ece_bins", ece_bins},
              {"seed", seed}};
}

std::string RunConfig::fingerprint() const { return credence::fingerprint(fingerprint_material()); }

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  if (path.is_absolute()) return path;
  return base_dir / path;
}

}  // namespace credence
