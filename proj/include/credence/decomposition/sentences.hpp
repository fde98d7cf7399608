#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "credence/decomposition/units.hpp"

namespace credence {

// Version tag for the abbreviation table shipped below; recorded in run
// metadata so segmentations stay comparable across runs.
extern const char* kAbbreviationTableVersion;

const std::vector<std::string>& abbreviation_table();

// token is the word immediately before a period, trailing period stripped,
// internal dots kept ("U.S" for "U.S.").
bool is_known_abbreviation(std::string_view token);

// Deterministic rule-based segmentation: terminal punctuation [.!?] ends a
// sentence unless blocked by the abbreviation table, a decimal number, or a
// dotted acronym, and the next non-space character starts a new sentence.
std::vector<std::string> split_sentence_texts(const std::string& text);

DecomposedResponse split_sentences(const std::string& response_id, const std::string& text);

}  // namespace credence
