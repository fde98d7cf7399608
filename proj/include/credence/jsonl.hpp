#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace credence {

// Reads a whole JSONL file. Parse failures report the 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Streaming variant for large files.
void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(size_t line_no, nlohmann::json)>& fn);

// Single-writer JSONL sink. Lines are dumped without insignificant whitespace
// so identical records serialize to identical bytes.
class JsonlWriter {
 public:
  JsonlWriter(const std::filesystem::path& path, bool append);
  void write(const nlohmann::json& record);
  void flush();
  size_t lines_written() const { return lines_; }

 private:
  std::ofstream out_;
  size_t lines_ = 0;
};

std::string sha256_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace credence
