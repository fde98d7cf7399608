#include "credence/providers/cache.hpp"

#include <chrono>
#include <fstream>

#include "credence/errors.hpp"
#include "credence/jsonl.hpp"

namespace credence {

using nlohmann::json;

namespace {

std::string iso8601_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ReplayCache::ReplayCache(std::filesystem::path path) : path_(std::move(path)), now_(iso8601_now) {
  if (!std::filesystem::exists(path_)) return;
  for_each_jsonl_line(path_, [&](size_t line_no, json rec) {
    if (!rec.contains("key") || !rec.contains("payload"))
      throw Error(path_.string() + ":" + std::to_string(line_no) +
                  ": replay entry missing key/payload");
    snapshot_.emplace(rec.at("key").get<std::string>(), rec.at("payload"));
  });
}

std::optional<json> ReplayCache::lookup(const std::string& key) const {
  auto it = snapshot_.find(key);
  if (it != snapshot_.end()) return it->second;
  std::lock_guard<std::mutex> lock(mu_);
  auto jt = overlay_.find(key);
  if (jt != overlay_.end()) return jt->second;
  return std::nullopt;
}

void ReplayCache::record(CacheEntry entry) {
  if (snapshot_.count(entry.key)) return;
  std::lock_guard<std::mutex> lock(mu_);
  if (overlay_.count(entry.key)) return;
  json rec{{"key", entry.key},
           {"provider_id", entry.provider_id},
           {"request", entry.request},
           {"payload", entry.payload},
           {"created_at", entry.created_at.empty() ? now_() : entry.created_at}};
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to replay store " + path_.string());
  out << rec.dump() << '\n';
  out.flush();
  overlay_.emplace(std::move(entry.key), std::move(entry.payload));
}

size_t ReplayCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snapshot_.size() + overlay_.size();
}

}  // namespace credence
