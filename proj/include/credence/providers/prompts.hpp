#pragma once

#include <map>
#include <string>
#include <vector>

namespace credence {

// Built-in prompt template store. Templates use {slot_name} placeholders and
// render by byte-exact substitution; nothing else in the template is touched.
class PromptLibrary {
 public:
  PromptLibrary();

  bool has(const std::string& template_id) const;
  const std::string& raw(const std::string& template_id) const;
  std::vector<std::string> ids() const;

  // Throws Error listing every missing slot name if the template references a
  // slot that was not supplied. Extra slots are ignored.
  std::string render(const std::string& template_id,
                     const std::map<std::string, std::string>& slots) const;

 private:
  std::map<std::string, std::string> templates_;
};

namespace template_ids {
inline constexpr const char* kFactscoreGradingSystem = "factscore_grading_system";
inline constexpr const char* kFactscoreGrading = "factscore_grading";
inline constexpr const char* kObjectivitySystem = "objectivity_system";
inline constexpr const char* kObjectivity = "objectivity";
inline constexpr const char* kClaimDecomposition = "claim_decomposition";
inline constexpr const char* kVerbalizedConfidence = "verbalized_confidence";
inline constexpr const char* kQuestionGeneration = "question_generation";
inline constexpr const char* kClaimMerge = "claim_merge";
inline constexpr const char* kResponseReconstruction = "response_reconstruction";
}  // namespace template_ids

}  // namespace credence
