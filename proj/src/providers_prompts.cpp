#include "credence/providers/prompts.hpp"

#include <cctype>

#include "credence/errors.hpp"

namespace credence {

namespace {

const char* kFactscoreGradingSystemText =
    R"PROMPT(You are a precise and objective fact-checking assistant specialized in evaluating factual claims against provided context. Your task is to determine whether claims are supported by the given context, following the FactScore evaluation protocol.

Guidelines for your evaluations:
1. Analyze each claim strictly based on the provided context, not your prior knowledge
2. Respond with "Yes" only if the claim is directly supported by information in the context
3. Respond with "No" if:
   - The claim contradicts the context
   - The claim contains information not present in the context
   - The claim makes assertions that go beyond what the context states

Important principles:
- Be conservative in your judgments - only mark claims as supported when there is clear evidence
- Ignore stylistic differences or paraphrasing if the factual content matches
- Do not make assumptions or inferences beyond what is explicitly stated in the context
- Maintain consistency in your evaluation criteria across all claim-context pairs

Your responses should be limited to "Yes" or "No" without additional explanation, as these will be processed automatically in the FactScore evaluation framework.)PROMPT";

const char* kFactscoreGradingText =
    R"PROMPT(Context: {answer}
Claim: {claim}
Is the claim supported by the context above?
Answer only Yes or No:)PROMPT";

const char* kObjectivitySystemText =
    R"PROMPT(You are an expert linguistic analyst specializing in distinguishing between objective and subjective statements.

Objective statements present verifiable facts, information, or observations that can be proven true or false through evidence. They are independent of personal interpretations or biases. Examples include statistical data, historical events, scientific measurements, or established facts.

Subjective statements express judgments, evaluations, or perspectives that may vary between individuals. They cannot be definitively proven true or false as they depend on viewpoint, taste, or interpretation. Examples include value judgments, aesthetic assessments, or statements containing evaluative language.

When analyzing a statement, consider:
- Does it contain verifiable facts or measurable data?
- Does it include evaluative terms like "good," "beautiful," "better," "worst," "important," or "significant"?
- Could different people reasonably disagree about the statement?
- Is the statement presenting information that exists independent of human judgment?

Respond only with "objective" or "subjective" based on your analysis.)PROMPT";

const char* kObjectivityText =
    R"PROMPT(Input: {claim}
Is the input subjective or objective?
Answer only subjective or objective:)PROMPT";

const char* kClaimDecompositionText =
    R"PROMPT(Please breakdown the following passage into independent fact pieces.

Step 1: For each sentence, you should break it into several fact pieces. Each fact piece should only contain one single independent fact. Normally the format of a fact piece is "subject + verb + object". If the sentence does not contain a verb, you can use "be" as the verb.

Step 2: Do this for all the sentences. Output each piece of fact in one single line starting with ###. Do not include other formatting.

Step 3: Each atomic fact should be self-contained. Do not use pronouns as the subject of a piece of fact, such as he, she, it, this that, use the original subject whenever possible.

Step 4: If the sentence does not contain any independent fact, you should output "### NONE".

Here are some examples:

Example 1:
Michael Collins (born October 31, 1930) is a retired American astronaut and test pilot who was the Command Module Pilot for the Apollo 11 mission in 1969.
### Michael Collins was born on October 31, 1930.
### Michael Collins is retired.
### Michael Collins is an American.
### Michael Collins was an astronaut.
### Michael Collins was a test pilot.
### Michael Collins was the Command Module Pilot.
### Michael Collins was the Command Module Pilot for the Apollo 11 mission.
### Michael Collins was the Command Module Pilot for the Apollo 11 mission in 1969.

Example 2:
League of Legends (often abbreviated as LoL) is a multiplayer online battle arena (MOBA) video game developed and published by Riot Games.
### League of Legends is a video game.
### League of Legends is often abbreviated as LoL.
### League of Legends is a multiplayer online battle arena.
### League of Legends is a MOBA video game.
### League of Legends is developed by Riot Games.
### League of Legends is published by Riot Games.

Example 3:
Emory University has a strong athletics program, competing in the National Collegiate Athletic Association (NCAA) Division I Atlantic Coast Conference (ACC). The university's mascot is the Eagle.
### Emory University has a strong athletics program.
### Emory University competes in the National Collegiate Athletic Association Division I.
### Emory University competes in the Atlantic Coast Conference.
### Emory University is part of the ACC.
### Emory University's mascot is the Eagle.

Example 4:
Hi
### NONE

Now it's your turn. Here is the passage:

{response}

You should only return the final answer. Now your answer is:)PROMPT";

const char* kVerbalizedConfidenceText =
    R"PROMPT(We are writing an answer to this question: {original_question}

Describe how likely it is that the specific claim below is correct as one of the following expressions:

No chance (0-20%)
Little chance (20-40%)
Less than even (40-60%)
Fairly possible (60-80%)
Very good chance (80-100%)
Almost certain (100%)

Give ONLY your confidence phrase, no other words or explanation. Your answer must contain ONLY one of the confidence phrases above.

Here is the claim: {claim}

Now your answer is: )PROMPT";

const char* kQuestionGenerationText =
    R"PROMPT(Following this text: {response}
You see the sentence: {factoid}
Generate a list of {num_questions} questions, that might have generated the sentence in the context of the preceding original text. Please do not use specific facts that appear in the follow-up sentence when formulating the questions. Avoid yes-no questions. The questions should have a concise, well-defined answer e.g. only a name, place, or thing. Output each question in one single line starting with ###. Do not include other formatting.

Example:
### Here is the first question? ### Here is the second question?

Now your response is:)PROMPT";

const char* kClaimMergeText =
    R"PROMPT(Given two lists titled "Original Claim List" and "New Claim List", your task is to integrate information from the "New Claim List" into the "Original Claim List". Please follow these detailed steps to ensure accuracy and clarity in the process:
Task 1. **Verification Process:** Your goal is to go through each statement in the "New Claim List" one by one, and determine if it is fully entailed or mentioned by any statement in the "Original Claim List."
Task 2. **Compilation of Non-Entailed Claims:** Generate a list of statements from the "New Claim List" that are not already covered or implied by the "Original Claim List." For each new or unique claim that does not have an equivalent in the original list, format your output by starting each line with a dash ('-').
**Original Claim List:**
{master_claim_str}
**New Claim List:**
{sampled_claim_str}
Begin with the Verification Process to assess each claim's relevance and uniqueness, followed by the Compilation of Non-Entailed Claims to clearly list any new insights that the "New Claim List" provides.)PROMPT";

// Not drawn from a published protocol; runs that use it mark it non-standard
// in their metadata.
const char* kResponseReconstructionText =
    R"PROMPT(Below is a list of factual claims retained from a draft answer after low-confidence claims were removed.

{claims}

Rewrite these claims as a single coherent response. Use every claim, do not add any new facts, and do not mention the filtering process.

Now your response is:)PROMPT";

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

PromptLibrary::PromptLibrary() {
  templates_ = {
      {template_ids::kFactscoreGradingSystem, kFactscoreGradingSystemText},
      {template_ids::kFactscoreGrading, kFactscoreGradingText},
      {template_ids::kObjectivitySystem, kObjectivitySystemText},
      {template_ids::kObjectivity, kObjectivityText},
      {template_ids::kClaimDecomposition, kClaimDecompositionText},
      {template_ids::kVerbalizedConfidence, kVerbalizedConfidenceText},
      {template_ids::kQuestionGeneration, kQuestionGenerationText},
      {template_ids::kClaimMerge, kClaimMergeText},
      {template_ids::kResponseReconstruction, kResponseReconstructionText},
  };
}

bool PromptLibrary::has(const std::string& template_id) const {
  return templates_.count(template_id) != 0;
}

const std::string& PromptLibrary::raw(const std::string& template_id) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end()) throw Error("unknown prompt template: " + template_id);
  return it->second;
}

std::vector<std::string> PromptLibrary::ids() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

std::string PromptLibrary::render(const std::string& template_id,
                                  const std::map<std::string, std::string>& slots) const {
  const std::string& tpl = raw(template_id);
  std::string out;
  out.reserve(tpl.size());
  std::vector<std::string> missing;
  size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      size_t j = i + 1;
      while (j < tpl.size() && ident_char(tpl[j])) ++j;
      if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
        std::string name = tpl.substr(i + 1, j - i - 1);
        auto it = slots.find(name);
        if (it != slots.end()) {
          out += it->second;
        } else {
          missing.push_back(name);
        }
        i = j + 1;
        continue;
      }
    }
    out.push_back(tpl[i]);
    ++i;
  }
  if (!missing.empty()) {
    std::string msg = "template " + template_id + " missing slots:";
    for (const auto& name : missing) msg += " " + name;
    throw Error(msg);
  }
  return out;
}

}  // namespace credence
