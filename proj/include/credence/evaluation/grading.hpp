#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "credence/decomposition/units.hpp"
#include "credence/providers/prompts.hpp"
#include "credence/providers/types.hpp"

namespace credence {

enum class FactLabel { Supported, Unsupported };
enum class Objectivity { Objective, Subjective };

std::string to_string(FactLabel l);
std::string to_string(Objectivity o);

struct GradeRecord {
  std::string unit_id;
  std::optional<FactLabel> label;
  std::optional<Objectivity> objectivity;  // claims only
  std::string grader_fp;

  nlohmann::json to_json() const;
  static GradeRecord from_json(const nlohmann::json& j);
};

// Leading yes/no token, case-insensitive, punctuation-tolerant.
std::optional<FactLabel> parse_grade_token(const std::string& response);
std::optional<Objectivity> parse_objectivity_token(const std::string& response);

// FactScore grading of one unit against a reference text. One re-prompt on a
// parse failure; a second failure raises FormatError (the pipeline then
// excludes the unit and logs an audit entry).
FactLabel factscore_grade(TextGenerator& generator, const PromptLibrary& prompts, const Unit& unit,
                          const std::string& context_text);

Objectivity classify_objectivity(TextGenerator& generator, const PromptLibrary& prompts,
                                 const Unit& claim);

}  // namespace credence
