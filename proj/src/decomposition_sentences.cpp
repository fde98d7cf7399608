#include "credence/decomposition/sentences.hpp"

#include <algorithm>
#include <cctype>

#include "credence/text.hpp"

namespace credence {

const char* kAbbreviationTableVersion = "abbrev-2025.1";

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

// Suppress a boundary after these regardless of what follows.
const std::vector<std::string> kAbbreviations = {
    "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",   "mt",  "ft",
    "vs",   "etc",  "e.g",  "i.e",  "cf",   "al",   "inc",  "ltd",  "co",  "corp",
    "dept", "div",  "est",  "approx", "gen", "col",  "capt", "lt",   "sgt", "maj",
    "adm",  "gov",  "sen",  "rep",  "hon",  "pres", "supt", "asst", "ave", "blvd",
    "rd",   "hwy",  "u.s",  "u.k",  "u.n",  "ph.d", "b.a",  "m.a",  "d.c", "a.m",
    "p.m",  "jan",  "feb",  "mar",  "apr",  "jun",  "jul",  "aug",  "sep", "sept",
    "oct",  "nov",  "dec",  "mon",  "tue",  "wed",  "thu",  "fri",  "sat", "sun"};

// Suppress a boundary only when the next token is a number ("No. 5", "pp. 12").
const std::vector<std::string> kNumericAbbreviations = {"no", "nos", "vol", "vols", "fig",
                                                        "figs", "eq",  "pp",  "p",   "sec",
                                                        "ch",   "op"};

bool in_table(const std::vector<std::string>& table, std::string_view token) {
  std::string lowered = ascii_lower(token);
  return std::find(table.begin(), table.end(), lowered) != table.end();
}

// Length of a closing quote/bracket at position k, 0 if none. Handles the
// UTF-8 right single/double quotation marks.
size_t closing_len(const std::string& s, size_t k) {
  if (k >= s.size()) return 0;
  char c = s[k];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  if (k + 2 < s.size() && static_cast<unsigned char>(s[k]) == 0xE2 &&
      static_cast<unsigned char>(s[k + 1]) == 0x80) {
    unsigned char b = static_cast<unsigned char>(s[k + 2]);
    if (b == 0x99 || b == 0x9D) return 3;  // ’ ”
  }
  return 0;
}

// Does the character at position m plausibly start a new sentence?
bool starts_new_sentence(const std::string& s, size_t m) {
  char c = s[m];
  if (is_upper(c) || is_digit(c)) return true;
  if (c == '"' || c == '\'' || c == '(' || c == '[') return true;
  if (m + 2 < s.size() && static_cast<unsigned char>(c) == 0xE2 &&
      static_cast<unsigned char>(s[m + 1]) == 0x80) {
    unsigned char b = static_cast<unsigned char>(s[m + 2]);
    if (b == 0x98 || b == 0x9C) return true;  // ‘ “
  }
  return false;
}

// Word immediately before position i (a '.'), leading punctuation stripped,
// internal dots kept.
std::string token_before(const std::string& s, size_t i) {
  size_t b = i;
  while (b > 0 && !is_space(s[b - 1])) --b;
  while (b < i && !is_alpha(s[b]) && !is_digit(s[b])) ++b;
  return s.substr(b, i - b);
}

}  // namespace

const std::vector<std::string>& abbreviation_table() { return kAbbreviations; }

bool is_known_abbreviation(std::string_view token) { return in_table(kAbbreviations, token); }

std::vector<std::string> split_sentence_texts(const std::string& text) {
  std::vector<std::string> out;
  const size_t n = text.size();
  size_t start = 0;
  size_t i = 0;
  auto flush = [&](size_t end) {
    std::string seg = trim(std::string_view(text).substr(start, end - start));
    if (!seg.empty()) out.push_back(std::move(seg));
  };
  while (i < n) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < n && is_terminal(text[j + 1])) ++j;
    const bool single_period = text[i] == '.' && j == i;
    if (single_period) {
      if (i > 0 && is_digit(text[i - 1]) && i + 1 < n && is_digit(text[i + 1])) {
        ++i;  // decimal: 3.14
        continue;
      }
      if (i + 1 < n && is_alpha(text[i + 1])) {
        ++i;  // dotted acronym interior: U.S.A
        continue;
      }
      std::string token = token_before(text, i);
      if (!token.empty() && !is_digit(token[0])) {
        if (in_table(kAbbreviations, token)) {
          ++i;
          continue;
        }
        if (in_table(kNumericAbbreviations, token)) {
          size_t m = i + 1;
          while (m < n && is_space(text[m])) ++m;
          if (m < n && is_digit(text[m])) {
            ++i;
            continue;
          }
        }
      }
    }
    size_t k = j + 1;
    while (true) {
      size_t len = closing_len(text, k);
      if (len == 0) break;
      k += len;
    }
    size_t m = k;
    while (m < n && is_space(text[m])) ++m;
    if (m >= n || starts_new_sentence(text, m)) {
      flush(k);
      start = m;
      i = m;
    } else {
      i = k;
    }
  }
  if (start < n) flush(n);
  return out;
}

DecomposedResponse split_sentences(const std::string& response_id, const std::string& text) {
  DecomposedResponse out;
  out.response_id = response_id;
  out.granularity = Granularity::Sentence;
  int ordinal = 0;
  for (auto& s : split_sentence_texts(text)) {
    Unit u;
    u.id = make_unit_id(response_id, Granularity::Sentence, ordinal);
    u.text = std::move(s);
    u.granularity = Granularity::Sentence;
    u.source_response = response_id;
    u.ordinal = ordinal;
    out.units.push_back(std::move(u));
    ++ordinal;
  }
  return out;
}

}  // namespace credence
