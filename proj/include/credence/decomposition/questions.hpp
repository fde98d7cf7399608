#pragma once

#include <string>
#include <vector>

#include "credence/decomposition/units.hpp"
#include "credence/providers/prompts.hpp"
#include "credence/providers/types.hpp"

namespace credence {

// Question inversion: asks the model for num_questions questions whose answer
// is `unit`, given the response it came from. A parseable question is a
// "###" item ending in '?'. Short outputs trigger one re-prompt (distinct
// cache tag); a second shortfall raises FormatError. Surplus questions are
// truncated to num_questions.
std::vector<UnitQuestion> invert_questions(TextGenerator& generator, const PromptLibrary& prompts,
                                           const std::string& context_response, const Unit& unit,
                                           int num_questions);

}  // namespace credence
