#include "credence/jsonl.hpp"

#include <sstream>

#include "credence/errors.hpp"
#include "credence/hashing.hpp"

namespace credence {

using nlohmann::json;

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> out;
  for_each_jsonl_line(path, [&](size_t, json rec) { out.push_back(std::move(rec)); });
  return out;
}

void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(size_t, json)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": invalid JSON line");
    fn(line_no, std::move(rec));
  }
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, bool append) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void JsonlWriter::write(const json& record) {
  out_ << record.dump() << '\n';
  ++lines_;
}

void JsonlWriter::flush() { out_.flush(); }

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
}

}  // namespace credence
