#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace credence {

inline constexpr const char* kToolVersion = "0.1.0";

// Per-run stage ledger. A stage is complete once its artifact checksums are
// recorded; artifacts from different config fingerprints never share a run
// directory.
struct RunManifest {
  std::string config_fingerprint;
  std::string tool_version = kToolVersion;
  nlohmann::json run_metadata = nlohmann::json::object();
  // stage -> {artifact filename -> sha256}
  std::map<std::string, std::map<std::string, std::string>> stages;

  bool stage_completed(const std::string& stage) const { return stages.count(stage) != 0; }

  // Loads run_dir/manifest.json if present (fingerprint mismatch is a
  // ConfigError), otherwise initializes a fresh manifest.
  static RunManifest load_or_init(const std::filesystem::path& run_dir,
                                  const std::string& config_fp);

  void mark_stage(const std::string& stage, const std::vector<std::string>& artifact_files,
                  const std::filesystem::path& run_dir);
  void save(const std::filesystem::path& run_dir) const;

  nlohmann::json to_json() const;
};

}  // namespace credence
