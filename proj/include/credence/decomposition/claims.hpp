#pragma once

#include <string>
#include <vector>

#include "credence/decomposition/units.hpp"
#include "credence/providers/prompts.hpp"
#include "credence/providers/types.hpp"

namespace credence {

// Items parsed from "###"-delimited model output: every line whose trimmed
// form starts with "###" is split on "###" and the nonempty trimmed pieces
// are kept, so multiple items on one line also parse.
std::vector<std::string> parse_hash_items(const std::string& raw);

// Lines whose trimmed form starts with "-", dash stripped.
std::vector<std::string> parse_dash_items(const std::string& raw);

// LLM-based atomic claim extraction. "### NONE" yields an empty unit list;
// claims are trimmed and deduplicated by normalize_claim keeping the first
// occurrence. Raises FormatError when no "###" line is present at all.
DecomposedResponse extract_claims(TextGenerator& generator, const PromptLibrary& prompts,
                                  const std::string& response_id, const std::string& response_text);

// Seeds a union with one response's claims (normally the original response).
ClaimUnion seed_claim_union(const DecomposedResponse& claims);

// One sequential merge step: asks the model which of new_claims are not yet
// covered by master and appends exactly those. Covered claims contribute
// provenance when they match an existing union claim textually.
// id_prefix names appended units ("<prompt>/union").
ClaimUnion merge_claims(TextGenerator& generator, const PromptLibrary& prompts,
                        const ClaimUnion& master, const std::vector<Unit>& new_claims,
                        const std::string& contributor_id, const std::string& id_prefix);

}  // namespace credence
