#pragma once

#include <string>
#include <string_view>

namespace credence {

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);  // runs of whitespace -> single space, trimmed
std::string ascii_lower(std::string_view s);

// casefold + whitespace collapse; the normalization behind exact_match.
std::string normalize_for_match(std::string_view s);

// casefold + whitespace collapse + trailing-period strip; the normalization
// used to deduplicate claims in a claim union.
std::string normalize_claim(std::string_view s);

bool starts_with_icase(std::string_view text, std::string_view prefix);

}  // namespace credence
