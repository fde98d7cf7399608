#pragma once

#include <atomic>
#include <string>

#include <json.hpp>

namespace credence {

// Per-scorer cost accounting. These count what the scorer's protocol
// consumed, so shared artifacts (sampled responses, the original response's
// claim decomposition) are attributed to every scorer that uses them, exactly
// as the per-family cost model states them. Physical provider traffic is
// deduplicated by the replay cache and reported separately.
struct ScorerCounters {
  std::atomic<long> comparisons{0};
  std::atomic<long> sampled_generations{0};
  std::atomic<long> original_decomposition_generations{0};
  std::atomic<long> sample_decomposition_generations{0};
  std::atomic<long> merge_generations{0};
  std::atomic<long> question_generations{0};
  std::atomic<long> answer_generations{0};
  std::atomic<long> reconstruction_generations{0};
  std::atomic<long> verbalized_generations{0};

  long generations_total() const {
    return sampled_generations + original_decomposition_generations +
           sample_decomposition_generations + merge_generations + question_generations +
           answer_generations + reconstruction_generations + verbalized_generations;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"comparisons", comparisons.load()},
        {"sampled_generations", sampled_generations.load()},
        {"original_decomposition_generations", original_decomposition_generations.load()},
        {"sample_decomposition_generations", sample_decomposition_generations.load()},
        {"merge_generations", merge_generations.load()},
        {"question_generations", question_generations.load()},
        {"answer_generations", answer_generations.load()},
        {"reconstruction_generations", reconstruction_generations.load()},
        {"verbalized_generations", verbalized_generations.load()},
        {"generations_total", generations_total()}};
  }

  static void from_json(const nlohmann::json& j, ScorerCounters& c) {
    c.comparisons = j.value("comparisons", 0L);
    c.sampled_generations = j.value("sampled_generations", 0L);
    c.original_decomposition_generations = j.value("original_decomposition_generations", 0L);
    c.sample_decomposition_generations = j.value("sample_decomposition_generations", 0L);
    c.merge_generations = j.value("merge_generations", 0L);
    c.question_generations = j.value("question_generations", 0L);
    c.answer_generations = j.value("answer_generations", 0L);
    c.reconstruction_generations = j.value("reconstruction_generations", 0L);
    c.verbalized_generations = j.value("verbalized_generations", 0L);
  }
};

}  // namespace credence
