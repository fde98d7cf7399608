#include "credence/pipeline/manifest.hpp"

#include "credence/errors.hpp"
#include "credence/jsonl.hpp"

namespace credence {

using nlohmann::json;

RunManifest RunManifest::load_or_init(const std::filesystem::path& run_dir,
                                      const std::string& config_fp) {
  RunManifest m;
  m.config_fingerprint = config_fp;
  auto path = run_dir / "manifest.json";
  if (!std::filesystem::exists(path)) return m;

  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("manifest " + path.string() + " is corrupt");
  std::string existing_fp = j.value("config_fingerprint", "");
  if (existing_fp != config_fp)
    throw ConfigError("run dir " + run_dir.string() + " belongs to config fingerprint " +
                      existing_fp + ", current config is " + config_fp +
                      "; use a fresh run dir");
  m.tool_version = j.value("tool_version", kToolVersion);
  m.run_metadata = j.value("run_metadata", json::object());
  if (j.contains("stages"))
    for (auto it = j.at("stages").begin(); it != j.at("stages").end(); ++it)
      m.stages[it.key()] = it.value().get<std::map<std::string, std::string>>();
  return m;
}

void RunManifest::mark_stage(const std::string& stage,
                             const std::vector<std::string>& artifact_files,
                             const std::filesystem::path& run_dir) {
  std::map<std::string, std::string> checksums;
  for (const auto& f : artifact_files) {
    auto path = run_dir / f;
    checksums[f] = std::filesystem::exists(path) ? sha256_file(path) : "";
  }
  stages[stage] = std::move(checksums);
  save(run_dir);
}

json RunManifest::to_json() const {
  json j{{"config_fingerprint", config_fingerprint},
         {"tool_version", tool_version},
         {"run_metadata", run_metadata}};
  json s = json::object();
  for (const auto& [stage, files] : stages) s[stage] = files;
  j["stages"] = s;
  return j;
}

void RunManifest::save(const std::filesystem::path& run_dir) const {
  std::filesystem::create_directories(run_dir);
  write_text_file(run_dir / "manifest.json", to_json().dump(2) + "\n");
}

}  // namespace credence
