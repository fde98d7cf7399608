#include "credence/evaluation/grading.hpp"

#include <cctype>
#include <functional>

#include "credence/errors.hpp"
#include "credence/text.hpp"

namespace credence {

using nlohmann::json;

std::string to_string(FactLabel l) { return l == FactLabel::Supported ? "supported" : "unsupported"; }
std::string to_string(Objectivity o) { return o == Objectivity::Objective ? "objective" : "subjective"; }

json GradeRecord::to_json() const {
  json j{{"unit_id", unit_id}, {"grader_fp", grader_fp}};
  j["label"] = label ? json(to_string(*label)) : json(nullptr);
  j["objectivity"] = objectivity ? json(to_string(*objectivity)) : json(nullptr);
  return j;
}

GradeRecord GradeRecord::from_json(const json& j) {
  GradeRecord r;
  r.unit_id = j.at("unit_id").get<std::string>();
  r.grader_fp = j.value("grader_fp", "");
  if (j.contains("label") && j.at("label").is_string()) {
    std::string l = j.at("label").get<std::string>();
    r.label = l == "supported" ? FactLabel::Supported : FactLabel::Unsupported;
  }
  if (j.contains("objectivity") && j.at("objectivity").is_string()) {
    std::string o = j.at("objectivity").get<std::string>();
    r.objectivity = o == "objective" ? Objectivity::Objective : Objectivity::Subjective;
  }
  return r;
}

namespace {

std::string leading_word(const std::string& response) {
  std::string t = trim(response);
  std::string word;
  for (char c : t) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else
      break;
  }
  return word;
}

}  // namespace

std::optional<FactLabel> parse_grade_token(const std::string& response) {
  std::string word = leading_word(response);
  if (word == "yes") return FactLabel::Supported;
  if (word == "no") return FactLabel::Unsupported;
  return std::nullopt;
}

std::optional<Objectivity> parse_objectivity_token(const std::string& response) {
  std::string word = leading_word(response);
  if (word == "objective") return Objectivity::Objective;
  if (word == "subjective") return Objectivity::Subjective;
  return std::nullopt;
}

namespace {

template <typename T>
T graded_call(TextGenerator& generator, const std::string& system_text, const std::string& prompt,
              const std::function<std::optional<T>(const std::string&)>& parse,
              const std::string& what, const std::string& unit_id) {
  GenerationRequest req;
  req.role_messages = {{"system", system_text}};
  req.prompt = prompt;
  req.n_samples = 1;
  req.temperature = 0.0;

  std::string raw = generator.generate(req).at(0);
  if (auto parsed = parse(raw)) return *parsed;
  GenerationRequest retry = req;
  retry.tag = "retry:1";
  raw = generator.generate(retry).at(0);
  if (auto parsed = parse(raw)) return *parsed;
  throw FormatError(what + " for unit " + unit_id + " was unparseable after retry", raw);
}

}  // namespace

FactLabel factscore_grade(TextGenerator& generator, const PromptLibrary& prompts, const Unit& unit,
                          const std::string& context_text) {
  if (trim(context_text).empty())
    throw Error("factscore_grade: empty reference context for unit " + unit.id);
  std::string prompt = prompts.render(template_ids::kFactscoreGrading,
                                      {{"answer", context_text}, {"claim", unit.text}});
  return graded_call<FactLabel>(generator, prompts.raw(template_ids::kFactscoreGradingSystem),
                                prompt, parse_grade_token, "grading", unit.id);
}

Objectivity classify_objectivity(TextGenerator& generator, const PromptLibrary& prompts,
                                 const Unit& claim) {
  std::string prompt = prompts.render(template_ids::kObjectivity, {{"claim", claim.text}});
  return graded_call<Objectivity>(generator, prompts.raw(template_ids::kObjectivitySystem), prompt,
                                  parse_objectivity_token, "objectivity", claim.id);
}

}  // namespace credence
