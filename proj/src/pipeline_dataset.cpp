#include "credence/pipeline/dataset.hpp"

#include <iostream>
#include <set>

#include <json.hpp>

#include "credence/errors.hpp"
#include "credence/jsonl.hpp"

namespace credence {

using nlohmann::json;

std::vector<PromptRecord> load_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("dataset not found: " + path.string());
  std::vector<PromptRecord> out;
  std::set<std::string> seen;
  for_each_jsonl_line(path, [&](size_t line_no, json rec) {
    auto fail = [&](const std::string& why) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!rec.is_object()) fail("dataset record must be an object");
    if (!rec.contains("prompt_id") || !rec.at("prompt_id").is_string())
      fail("missing string field 'prompt_id'");
    if (!rec.contains("prompt") || !rec.at("prompt").is_string())
      fail("missing string field 'prompt'");
    PromptRecord p;
    p.prompt_id = rec.at("prompt_id").get<std::string>();
    p.prompt = rec.at("prompt").get<std::string>();
    p.reference_text = rec.value("reference_text", "");
    if (p.prompt_id.empty()) fail("prompt_id must be nonempty");
    if (!seen.insert(p.prompt_id).second) fail("duplicate prompt_id '" + p.prompt_id + "'");
    out.push_back(std::move(p));
  });
  if (out.empty())
    std::cerr << "warning: dataset " << path.string() << " contains no prompts; run will be empty\n";
  return out;
}

}  // namespace credence
