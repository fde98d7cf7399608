#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace credence {

struct PromptRecord {
  std::string prompt_id;
  std::string prompt;
  std::string reference_text;  // optional grading context
};

// JSONL dataset: {"prompt_id": ..., "prompt": ..., "reference_text"?: ...}.
// Schema violations report the offending line; an empty file yields an empty
// run with a warning on stderr.
std::vector<PromptRecord> load_dataset(const std::filesystem::path& path);

}  // namespace credence
