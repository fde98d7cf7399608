#include <doctest.h>

#include <atomic>
#include <functional>
#include <map>
#include <random>

#include "credence/errors.hpp"
#include "credence/scorers/scorers.hpp"
#include "support/oracles.hpp"

using namespace credence;

namespace {

struct MockNli final : NliProvider {
  std::function<NliJudgment(const std::string&, const std::string&)> fn;
  NliJudgment nli(const std::string& a, const std::string& b) override { return fn(a, b); }
};

struct MockGenerator final : TextGenerator {
  std::function<std::vector<std::string>(const GenerationRequest&)> fn;
  std::vector<std::string> generate(const GenerationRequest& req) override { return fn(req); }
};

Unit make_unit(const std::string& id, const std::string& text, Granularity g) {
  Unit u;
  u.id = id;
  u.text = text;
  u.granularity = g;
  u.source_response = "orig";
  u.ordinal = 0;
  return u;
}

// NLI whose entailment probability is scripted per premise text.
MockNli scripted_entailment(std::map<std::string, double> by_premise) {
  MockNli nli;
  nli.fn = [by_premise = std::move(by_premise)](const std::string& premise, const std::string&) {
    double e = by_premise.count(premise) ? by_premise.at(premise) : 0.0;
    return NliJudgment{e, (1.0 - e) / 2.0, (1.0 - e) / 2.0};
  };
  return nli;
}

}  // namespace

TEST_CASE("scorer admissibility matrix") {
  auto parse = [](const char* family, const char* gran, const char* eta) {
    return ScorerConfig::parse({{"family", family}, {"granularity", gran}, {"eta", eta}});
  };
  CHECK_NOTHROW(parse("unit_response", "claim", "entailment"));
  CHECK_NOTHROW(parse("unit_response", "sent", "contrasted_entailment"));
  CHECK_NOTHROW(parse("matched_unit", "sent", "bert_f1"));
  CHECK_NOTHROW(parse("unit_qa", "claim", "negentropy"));
  CHECK_NOTHROW(parse("unit_qa", "sent", "exact_match"));
  CHECK_NOTHROW(parse("graph_based", "claim", "pagerank"));
  CHECK_NOTHROW(ScorerConfig::parse({{"family", "verbalized"}, {"granularity", "claim"}}));

  // the excluded combinations
  CHECK_THROWS_AS(parse("graph_based", "sent", "closeness"), ConfigError);
  CHECK_THROWS_AS(parse("unit_response", "claim", "normalized_cosine"), ConfigError);
  CHECK_THROWS_AS(parse("unit_response", "claim", "exact_match"), ConfigError);
  CHECK_THROWS_AS(parse("matched_unit", "claim", "entailment"), ConfigError);
  CHECK_THROWS_AS(parse("matched_unit", "sent", "exact_match"), ConfigError);
  CHECK_THROWS_AS(parse("unit_qa", "claim", "entailment"), ConfigError);
  CHECK_THROWS_AS(parse("graph_based", "claim", "entailment"), ConfigError);
}

TEST_CASE("unit-response score is the mean of per-candidate eta") {
  auto unit = make_unit("u0", "the unit", Granularity::Claim);

  std::atomic<long> comparisons{0};
  MockNli ones;
  ones.fn = [](const std::string&, const std::string&) { return NliJudgment{1.0, 0.0, 0.0}; };
  EtaEvaluator eta_ones(&ones, nullptr, &comparisons);
  auto rec = unit_response_score(unit, {"a", "b", "c", "d", "e"}, ConsistencyKind::Entailment,
                                 eta_ones);
  CHECK(rec.score == doctest::Approx(1.0));
  CHECK(rec.evidence.size() == 5);
  CHECK(comparisons.load() == 5);

  auto scripted = scripted_entailment({{"a", 1.0}, {"b", 0.0}, {"c", 1.0}});
  EtaEvaluator eta(&scripted, nullptr, nullptr);
  auto mean = unit_response_score(unit, {"a", "b", "c"}, ConsistencyKind::Entailment, eta);
  CHECK(mean.score == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // adding a candidate whose eta equals the current mean leaves it unchanged
  auto scripted2 = scripted_entailment({{"a", 1.0}, {"b", 0.0}, {"c", 1.0}, {"d", 2.0 / 3.0}});
  EtaEvaluator eta2(&scripted2, nullptr, nullptr);
  auto grown = unit_response_score(unit, {"a", "b", "c", "d"}, ConsistencyKind::Entailment, eta2);
  CHECK(grown.score == doctest::Approx(mean.score).epsilon(1e-12));

  CHECK_THROWS_AS(
      unit_response_score(unit, {"a"}, ConsistencyKind::NormalizedCosine, eta),
      ConfigError);
  CHECK_THROWS_AS(unit_response_score(unit, {}, ConsistencyKind::Entailment, eta), Error);
}

TEST_CASE("matched-unit score takes max within candidates then the mean") {
  auto unit = make_unit("u0", "target", Granularity::Sentence);

  auto cand = [](const std::string& rid, std::vector<std::string> texts) {
    DecomposedResponse d;
    d.response_id = rid;
    d.granularity = Granularity::Sentence;
    int ordinal = 0;
    for (auto& t : texts) {
      Unit u;
      u.id = rid + "#sent" + std::to_string(ordinal);
      u.text = std::move(t);
      u.granularity = Granularity::Sentence;
      u.source_response = rid;
      u.ordinal = ordinal++;
      d.units.push_back(std::move(u));
    }
    return d;
  };

  auto scripted = scripted_entailment({{"s1a", 0.2}, {"s1b", 0.9}, {"s2a", 0.4}, {"s2b", 0.4}});
  EtaEvaluator eta(&scripted, nullptr, nullptr);
  auto rec = matched_unit_score(unit,
                                {cand("y1", {"s1a", "s1b"}), cand("y2", {"s2a", "s2b"})},
                                ConsistencyKind::Entailment, eta);
  CHECK(rec.score == doctest::Approx((0.9 + 0.4) / 2.0).epsilon(1e-12));
  CHECK(rec.evidence.size() == 2);  // one max per candidate

  // empty candidate decomposition contributes zero
  auto with_empty = matched_unit_score(unit, {cand("y1", {"s1b"}), cand("y2", {})},
                                       ConsistencyKind::Entailment, eta);
  CHECK(with_empty.score == doctest::Approx(0.45).epsilon(1e-12));

  // dominance: max-then-mean is at least the mean of any fixed per-candidate pick
  std::mt19937 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, double> table;
    std::vector<DecomposedResponse> cands;
    std::vector<std::vector<double>> values;
    for (int j = 0; j < 3; ++j) {
      std::vector<std::string> texts;
      std::vector<double> row;
      for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k) {
        std::string t = "t" + std::to_string(trial) + "_" + std::to_string(j) + "_" +
                        std::to_string(k);
        double v = static_cast<double>(rng() % 1000) / 1000.0;
        table[t] = v;
        texts.push_back(t);
        row.push_back(v);
      }
      cands.push_back(cand("y" + std::to_string(j), texts));
      values.push_back(row);
    }
    auto scripted_random = scripted_entailment(table);
    EtaEvaluator eta_random(&scripted_random, nullptr, nullptr);
    auto max_rec = matched_unit_score(unit, cands, ConsistencyKind::Entailment, eta_random);
    double any_pick = 0.0;
    for (const auto& row : values) any_pick += row[rng() % row.size()];
    any_pick /= static_cast<double>(values.size());
    CHECK(max_rec.score >= any_pick - 1e-12);
  }
}

TEST_CASE("unit-QA score averages per question then across questions") {
  auto unit = make_unit("u0", "the unit", Granularity::Claim);

  SUBCASE("exact match with identical answers is 1.0") {
    EtaEvaluator eta(nullptr, nullptr, nullptr);
    std::vector<QuestionAnswers> qs = {{"same", {"same", "same", "same"}}};
    CHECK(unit_qa_score(unit, qs, ScoreSignal::ExactMatch, eta).score == doctest::Approx(1.0));
  }

  SUBCASE("mean across questions is unweighted") {
    // per-question scores 0.4 and 0.8 via exact match over 5 answers
    EtaEvaluator eta(nullptr, nullptr, nullptr);
    std::vector<QuestionAnswers> qs = {
        {"x", {"x", "x", "o1", "o2", "o3"}},       // 2/5 = 0.4
        {"y", {"y", "y", "y", "y", "o"}},          // 4/5 = 0.8
    };
    auto rec = unit_qa_score(unit, qs, ScoreSignal::ExactMatch, eta);
    CHECK(rec.score == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(rec.evidence.size() == 10);
  }

  SUBCASE("negentropy over mutually entailing answers is 1.0") {
    MockNli nli;
    nli.fn = [](const std::string&, const std::string&) { return NliJudgment{0.9, 0.05, 0.05}; };
    EtaEvaluator eta(&nli, nullptr, nullptr);
    std::vector<QuestionAnswers> qs = {{"a0", {"a1", "a2", "a3", "a4", "a5"}}};
    CHECK(unit_qa_score(unit, qs, ScoreSignal::Negentropy, eta).score == doctest::Approx(1.0));
  }

  SUBCASE("missing answers name the question ordinal") {
    EtaEvaluator eta(nullptr, nullptr, nullptr);
    std::vector<QuestionAnswers> qs = {{"a0", {"a1"}}, {"", {}}};
    try {
      unit_qa_score(unit, qs, ScoreSignal::ExactMatch, eta);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("question 2") != std::string::npos);
    }
  }
}

TEST_CASE("graph-based scores surface the requested metric per union claim") {
  auto g = testing::make_graph(3, 2, {{0, 0}, {0, 1}, {1, 0}});
  auto report = centrality_report(g, 0.85);

  auto closeness_recs = graph_based_scores(g, report, ScoreSignal::Closeness);
  REQUIRE(closeness_recs.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(closeness_recs[i].unit_id == g.claim_nodes[i].id);
    CHECK(closeness_recs[i].score == doctest::Approx(report.per_claim[i].closeness));
    CHECK(closeness_recs[i].granularity == Granularity::Claim);
  }

  auto pagerank_recs = graph_based_scores(g, report, ScoreSignal::Pagerank);
  auto oracle = testing::oracle_pagerank(g, 0.85);
  for (size_t i = 0; i < 3; ++i)
    CHECK(pagerank_recs[i].score == doctest::Approx(oracle[i]).epsilon(1e-8));

  CHECK_THROWS_AS(graph_based_scores(g, report, ScoreSignal::Entailment), ConfigError);
}

TEST_CASE("verbalized confidence parses phrase prefixes into anchors") {
  CHECK(parse_confidence_phrase("Almost certain") == doctest::Approx(1.0));
  CHECK(parse_confidence_phrase("No chance") == doctest::Approx(0.1));
  CHECK(parse_confidence_phrase("little chance (20-40%)") == doctest::Approx(0.3));
  CHECK(parse_confidence_phrase("Less than even") == doctest::Approx(0.5));
  CHECK(parse_confidence_phrase("fairly possible (60-80%)") == doctest::Approx(0.7));
  CHECK(parse_confidence_phrase("fairly possible (60–80%)") == doctest::Approx(0.7));
  CHECK(parse_confidence_phrase("Very good chance (80-100%)") == doctest::Approx(0.9));
  CHECK(!parse_confidence_phrase("certainly yes"));

  auto unit = make_unit("u0", "the claim", Granularity::Claim);
  PromptLibrary lib;

  MockGenerator gen;
  gen.fn = [](const GenerationRequest&) { return std::vector<std::string>{"Fairly possible"}; };
  auto rec = verbalized_confidence(gen, lib, unit, "original question?");
  CHECK(rec.score == doctest::Approx(0.7));
  CHECK(rec.family == ScorerFamily::Verbalized);

  // one re-prompt with a distinct tag, then success
  MockGenerator flaky;
  int calls = 0;
  flaky.fn = [&](const GenerationRequest& req) {
    ++calls;
    if (req.tag.empty()) return std::vector<std::string>{"hmm, unsure"};
    return std::vector<std::string>{"No chance"};
  };
  CHECK(verbalized_confidence(flaky, lib, unit, "q?").score == doctest::Approx(0.1));
  CHECK(calls == 2);

  MockGenerator hopeless;
  hopeless.fn = [](const GenerationRequest&) { return std::vector<std::string>{"who knows"}; };
  CHECK_THROWS_AS(verbalized_confidence(hopeless, lib, unit, "q?"), FormatError);
}

TEST_CASE("scores stay in [0,1] across random evidence") {
  std::mt19937 rng(23);
  auto unit = make_unit("u0", "unit", Granularity::Claim);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, double> table;
    std::vector<std::string> cands;
    for (int j = 0; j < 1 + static_cast<int>(rng() % 6); ++j) {
      std::string t = "cand" + std::to_string(trial) + "_" + std::to_string(j);
      table[t] = static_cast<double>(rng() % 1001) / 1000.0;
      cands.push_back(t);
    }
    auto scripted = scripted_entailment(table);
    EtaEvaluator eta(&scripted, nullptr, nullptr);
    auto rec = unit_response_score(unit, cands, ConsistencyKind::Entailment, eta);
    CHECK(rec.score >= 0.0);
    CHECK(rec.score <= 1.0);
    CHECK(rec.evidence.size() == cands.size());
  }
}
