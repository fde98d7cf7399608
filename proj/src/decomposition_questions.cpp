#include "credence/decomposition/questions.hpp"

#include "credence/decomposition/claims.hpp"
#include "credence/errors.hpp"
#include "credence/text.hpp"

namespace credence {

std::vector<UnitQuestion> invert_questions(TextGenerator& generator, const PromptLibrary& prompts,
                                           const std::string& context_response, const Unit& unit,
                                           int num_questions) {
  if (num_questions < 1) throw Error("invert_questions: num_questions must be >= 1");

  GenerationRequest req;
  req.prompt = prompts.render(template_ids::kQuestionGeneration,
                              {{"response", context_response},
                               {"factoid", unit.text},
                               {"num_questions", std::to_string(num_questions)}});
  req.n_samples = 1;
  req.temperature = 0.0;

  auto parse = [](const std::string& raw) {
    std::vector<std::string> questions;
    for (auto& item : parse_hash_items(raw))
      if (!item.empty() && item.back() == '?') questions.push_back(std::move(item));
    return questions;
  };

  std::string raw = generator.generate(req).at(0);
  auto questions = parse(raw);
  if (static_cast<int>(questions.size()) < num_questions) {
    GenerationRequest retry = req;
    retry.tag = "retry:1";
    raw = generator.generate(retry).at(0);
    questions = parse(raw);
  }
  if (static_cast<int>(questions.size()) < num_questions)
    throw FormatError("question inversion for unit " + unit.id + " produced " +
                          std::to_string(questions.size()) + " of " +
                          std::to_string(num_questions) + " questions after retry",
                      raw);

  std::vector<UnitQuestion> out;
  for (int i = 0; i < num_questions; ++i)
    out.push_back(UnitQuestion{unit.id, questions[static_cast<size_t>(i)], i + 1});
  return out;
}

}  // namespace credence
