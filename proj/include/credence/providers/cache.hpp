#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <json.hpp>

namespace credence {

struct CacheEntry {
  std::string key;          // cache_key(provider_id, request)
  std::string provider_id;
  nlohmann::json request;   // logical request, for auditability
  nlohmann::json payload;   // {"status": int, "body": string} — raw response body
  std::string created_at;
};

// Append-only JSONL replay store. Entries present at open time form an
// immutable snapshot readable without locking; entries recorded during the
// run live in a mutex-guarded overlay. One entry per key; re-recording an
// existing key is a no-op.
class ReplayCache {
 public:
  // Loads path if it exists; missing file means an empty store (record mode
  // will create it on first write).
  explicit ReplayCache(std::filesystem::path path);

  std::optional<nlohmann::json> lookup(const std::string& key) const;
  void record(CacheEntry entry);

  size_t size() const;
  const std::filesystem::path& path() const { return path_; }

  // Injectable clock so fixture stores serialize identically across runs.
  void set_clock(std::function<std::string()> now) { now_ = std::move(now); }

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, nlohmann::json> snapshot_;
  std::unordered_map<std::string, nlohmann::json> overlay_;
  mutable std::mutex mu_;  // guards overlay_ and file appends
  std::function<std::string()> now_;
};

}  // namespace credence
