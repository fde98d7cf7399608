#include "support/scenario.hpp"

#include <optional>
#include <sstream>

#include "credence/errors.hpp"
#include "credence/hashing.hpp"
#include "credence/text.hpp"

namespace credence::scenario {

using nlohmann::json;

namespace {

struct SubjectData {
  SubjectWorld world;
  std::vector<std::string> claims;
};

std::vector<SubjectData> build_subjects() {
  SubjectData alice;
  alice.world = SubjectWorld{
      "bio-alice",
      "Alice Aster",
      "Write a short biography of Alice Aster.",
      "Alice Aster was born in 1901 in Graz. Alice Aster studied physics at Leiden University. "
      "Alice Aster wrote three books about wave optics. Alice Aster retired in 1960.",
      "Alice Aster was born in 1901 in Graz.",
      "Alice Aster studied physics at Leiden University."};
  alice.claims = {
      "Alice Aster was born in 1901.",     "Alice Aster was born in Graz.",
      "Alice Aster studied physics.",      "Alice Aster studied at Leiden University.",
      "Alice Aster is admired worldwide.",
  };

  SubjectData bob;
  bob.world = SubjectWorld{
      "bio-bob",
      "Bob Breva",
      "Write a short biography of Bob Breva.",
      "Bob Breva was born in 1912 in Porto. Bob Breva taught chemistry in Lyon for twenty "
      "years. Bob Breva won the Harbor Medal in 1950.",
      "Bob Breva was born in 1912 in Porto.",
      "Bob Breva taught chemistry in Lyon."};
  bob.claims = {
      "Bob Breva was born in 1912.",     "Bob Breva was born in Porto.",
      "Bob Breva taught chemistry.",     "Bob Breva taught in Lyon.",
      "Bob Breva is admired worldwide.",
  };
  return {std::move(alice), std::move(bob)};
}

const std::vector<SubjectData>& subject_data() {
  static const std::vector<SubjectData> kData = build_subjects();
  return kData;
}

const SubjectData& data_for(const SubjectWorld& w) {
  for (const auto& d : subject_data())
    if (d.world.prompt_id == w.prompt_id) return d;
  throw Error("scenario: unknown subject " + w.subject);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string strip_period(std::string s) {
  while (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

json chat_body(const std::vector<std::string>& texts) {
  json choices = json::array();
  for (const auto& t : texts) choices.push_back({{"message", {{"content", t}}}});
  return json{{"choices", choices}};
}

json nli_body(double e, double c, double n) {
  return json{{"scores", {{"entailment", e}, {"contradiction", c}, {"neutral", n}}}};
}

std::vector<double> vector_for(const std::string& text) {
  std::string digest = sha256_hex("vec:" + text);
  std::vector<double> v;
  for (int i = 0; i < 8; ++i) {
    unsigned value =
        static_cast<unsigned>(std::stoul(digest.substr(static_cast<size_t>(i) * 2, 2), nullptr, 16));
    v.push_back(static_cast<double>(value) / 255.0 * 2.0 - 1.0);
  }
  if (v[0] == 0.0) v[0] = 0.25;
  return v;
}

std::string extract_between(const std::string& text, const std::string& from,
                            const std::string& to) {
  auto b = text.find(from);
  if (b == std::string::npos) throw Error("scenario: marker not found: " + from);
  b += from.size();
  auto e = to.empty() ? text.size() : text.find(to, b);
  if (e == std::string::npos) throw Error("scenario: end marker not found: " + to);
  return text.substr(b, e - b);
}

// Sample index (1..m) when text is exactly one sampled response.
std::optional<int> sample_index(const SubjectWorld& w, const std::string& text) {
  for (int j = 1; j <= kSamples; ++j)
    if (text == w.sample_text(j)) return j;
  return std::nullopt;
}

std::optional<int> original_claim_index(const SubjectWorld& w, const std::string& text) {
  const auto& claims = data_for(w).claims;
  for (size_t i = 0; i < claims.size(); ++i)
    if (text == claims[i]) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> note_claim_index(const SubjectWorld& w, const std::string& text) {
  for (int j = 1; j <= kSamples; ++j)
    if (text == w.note_claim(j)) return j;
  return std::nullopt;
}

// Whether sampled response j entails original claim i; Alice and Bob follow
// different patterns so the two prompts do not score identically.
bool edge_bit(const SubjectWorld& w, int claim_index, int j) {
  if (w.prompt_id == "bio-alice") return (claim_index + j) % 3 != 0;
  return (claim_index + 2 * j) % 3 != 0;
}

// Which known unit does this text mention (sentences first, then claims)?
struct UnitProfile {
  const SubjectWorld* world = nullptr;
  int claim_index = -1;
  int sentence = 0;  // 1 or 2 when a sentence matched
};

std::optional<UnitProfile> profile_for(const std::string& text) {
  for (const auto& d : subject_data()) {
    const auto& w = d.world;
    if (text.find(strip_period(w.fact1)) != std::string::npos) return UnitProfile{&w, -1, 1};
    if (text.find(strip_period(w.fact2)) != std::string::npos) return UnitProfile{&w, -1, 2};
    for (size_t i = 0; i < d.claims.size(); ++i)
      if (text.find(strip_period(d.claims[i])) != std::string::npos)
        return UnitProfile{&w, static_cast<int>(i), 0};
  }
  return std::nullopt;
}

// Answers to a unit question agree or disperse depending on the unit.
bool answers_consistent(const UnitProfile& p) {
  if (p.claim_index >= 0) {
    bool even = p.claim_index % 2 == 0;
    return p.world->prompt_id == "bio-alice" ? even : !even;
  }
  return p.sentence == 1;
}

std::vector<std::string> answers_for(const std::string& question, int n) {
  auto profile = profile_for(question);
  std::string key;
  bool consistent;
  if (profile) {
    key = profile->world->subject + "/" +
          (profile->claim_index >= 0 ? "c" + std::to_string(profile->claim_index)
                                     : "s" + std::to_string(profile->sentence));
    consistent = answers_consistent(*profile);
  } else {
    key = "q" + std::to_string(fnv1a(question) % 97);
    consistent = fnv1a(question) % 2 == 0;
  }
  std::vector<std::string> out;
  for (int k = 0; k < n; ++k) {
    if (consistent)
      out.push_back("The settled answer regarding " + key + ".");
    else
      out.push_back("Take " + std::to_string(k + 1) + " regarding " + key + ".");
  }
  return out;
}

json handle_generation(const json& body) {
  const auto& messages = body.at("messages");
  const std::string prompt = messages.back().at("content").get<std::string>();
  const int n = body.at("n").get<int>();

  if (prompt.find("Here is the passage:") != std::string::npos) {
    std::string passage =
        trim(extract_between(prompt, "Here is the passage:", "You should only return"));
    const auto& w = subject_for(passage);
    std::vector<std::string> claims;
    if (passage == w.original_response())
      claims = w.original_claims();
    else if (auto j = sample_index(w, passage))
      claims = w.sample_claims(*j);
    else
      throw Error("scenario: unscripted decomposition passage: " + passage);
    std::string out;
    for (const auto& c : claims) out += "### " + c + "\n";
    return chat_body({out});
  }

  if (prompt.find("**Original Claim List:**") != std::string::npos) {
    std::string new_list =
        extract_between(prompt, "**New Claim List:**\n", "\nBegin with the Verification");
    std::string out = "Verification complete.\n";
    bool any = false;
    for (const auto& d : subject_data()) {
      for (int j = 1; j <= kSamples; ++j) {
        if (new_list.find(d.world.note_claim(j)) != std::string::npos) {
          out += "- " + d.world.note_claim(j) + "\n";
          any = true;
        }
      }
    }
    if (!any) out += "All new claims are already covered by the original list.\n";
    return chat_body({out});
  }

  if (prompt.find("Generate a list of ") != std::string::npos) {
    int count = std::stoi(extract_between(prompt, "Generate a list of ", " questions"));
    std::string factoid = trim(extract_between(prompt, "You see the sentence: ", "\n"));
    std::string line;
    for (int k = 1; k <= count; ++k) {
      if (k > 1) line += " ";
      line += "### Question " + std::to_string(k) + " on [" + strip_period(factoid) + "]?";
    }
    return chat_body({line});
  }

  if (prompt.find("Is the claim supported by the context above?") != std::string::npos) {
    std::string claim = trim(extract_between(prompt, "Claim: ", "\n"));
    return chat_body({subject_for(claim).grade(claim) ? "Yes" : "No"});
  }

  if (prompt.find("Is the input subjective or objective?") != std::string::npos) {
    std::string claim = trim(extract_between(prompt, "Input: ", "\n"));
    bool subjective = claim.find("admired") != std::string::npos ||
                      claim.find("greatest") != std::string::npos;
    return chat_body({subjective ? "subjective" : "objective"});
  }

  if (prompt.find("Describe how likely") != std::string::npos) {
    static const char* kPhrases[6] = {"No chance (0-20%)",         "Little chance (20-40%)",
                                      "Less than even (40-60%)",   "Fairly possible (60-80%)",
                                      "Very good chance (80-100%)", "Almost certain (100%)"};
    std::string claim = trim(extract_between(prompt, "Here is the claim: ", "\n"));
    return chat_body({kPhrases[fnv1a(claim) % 6]});
  }

  if (prompt.find("Rewrite these claims") != std::string::npos) {
    std::string listing = extract_between(prompt, "removed.\n\n", "\n\nRewrite these claims");
    std::string acc = "Here is the rewritten account.";
    std::istringstream in(listing);
    std::string line;
    while (std::getline(in, line)) {
      std::string t = trim(line);
      if (t.rfind("- ", 0) == 0) acc += " " + t.substr(2);
    }
    return chat_body({acc});
  }

  if (prompt.rfind("Write a short biography of ", 0) == 0) {
    const auto& w = subject_for(prompt);
    if (n == 1) return chat_body({w.original_response()});
    std::vector<std::string> out;
    for (int j = 1; j <= n; ++j) out.push_back(w.sample_text(j));
    return chat_body(out);
  }

  if (!prompt.empty() && prompt.back() == '?') return chat_body(answers_for(prompt, n));

  throw Error("scenario: unscripted generation prompt: " + prompt.substr(0, 160));
}

json handle_nli(const json& body) {
  const std::string premise = body.at("premise").get<std::string>();
  const std::string hypothesis = body.at("hypothesis").get<std::string>();

  // Pinned fixture pair: a clean contradiction.
  if (premise == "The sky is blue." && hypothesis == "The sky is green.")
    return nli_body(0.02, 0.95, 0.03);

  if (normalize_for_match(premise) == normalize_for_match(hypothesis))
    return nli_body(0.95, 0.02, 0.03);

  // Entailment-graph edges take priority over the generic substring rule.
  for (const auto& d : subject_data()) {
    auto j = sample_index(d.world, premise);
    if (!j) continue;
    if (auto ci = original_claim_index(d.world, hypothesis))
      return edge_bit(d.world, *ci, *j) ? nli_body(0.9, 0.05, 0.05) : nli_body(0.05, 0.15, 0.8);
    if (auto nk = note_claim_index(d.world, hypothesis))
      return *nk == *j ? nli_body(0.9, 0.05, 0.05) : nli_body(0.05, 0.15, 0.8);
  }

  if (premise.find(strip_period(hypothesis)) != std::string::npos)
    return nli_body(0.9, 0.05, 0.05);

  // QA answer pairs about the same unit but with different takes contradict.
  if (premise.find(" regarding ") != std::string::npos &&
      hypothesis.find(" regarding ") != std::string::npos)
    return nli_body(0.05, 0.7, 0.25);

  return nli_body(0.05, 0.15, 0.8);
}

json handle_embedding(const json& body) {
  const std::string text = body.at("input").get<std::string>();
  const std::string mode = body.value("mode", "single");
  if (mode == "tokens") {
    json tokens = json::array();
    std::istringstream in(text);
    std::string token;
    int count = 0;
    while (in >> token && count < 16) {
      tokens.push_back({{"token", token}, {"embedding", vector_for(token)}});
      ++count;
    }
    if (tokens.empty()) tokens.push_back({{"token", text}, {"embedding", vector_for(text)}});
    return json{{"tokens", tokens}};
  }
  return json{{"model", "sim-embed"},
              {"data", json::array({json{{"embedding", vector_for(text)}}})}};
}

}  // namespace

std::string SubjectWorld::original_response() const { return fact1 + " " + fact2; }

std::string SubjectWorld::sample_text(int j) const {
  return (j % 2 == 1 ? fact1 : fact2) + " " + note_claim(j);
}

std::string SubjectWorld::note_claim(int j) const {
  return subject + " note " + std::to_string(j) + " stands alone.";
}

std::vector<std::string> SubjectWorld::original_claims() const { return data_for(*this).claims; }

std::vector<std::string> SubjectWorld::sample_claims(int j) const {
  const auto& claims = data_for(*this).claims;
  return {claims[0], claims[2], note_claim(j)};
}

bool SubjectWorld::grade(const std::string& unit_text) const {
  const auto& claims = data_for(*this).claims;
  std::string t = normalize_for_match(unit_text);
  auto is = [&](const std::string& s) { return t == normalize_for_match(s); };
  if (prompt_id == "bio-alice") {
    if (is(claims[0]) || is(claims[1]) || is(claims[2]) || is(claims[4])) return true;
    if (is(claims[3])) return false;
    if (is(fact1)) return true;
    if (is(fact2)) return false;
  } else {
    if (is(claims[0]) || is(claims[2])) return true;
    if (is(claims[1]) || is(claims[3]) || is(claims[4])) return false;
    if (is(fact1) || is(fact2)) return true;
  }
  throw Error("scenario: no scripted grade for: " + unit_text);
}

const std::vector<SubjectWorld>& subjects() {
  static const std::vector<SubjectWorld> kSubjects = [] {
    std::vector<SubjectWorld> out;
    for (const auto& d : subject_data()) out.push_back(d.world);
    return out;
  }();
  return kSubjects;
}

const SubjectWorld& subject_for(const std::string& text) {
  for (const auto& s : subjects())
    if (text.find(s.subject) != std::string::npos) return s;
  throw Error("scenario: no subject mentioned in: " + text.substr(0, 120));
}

HttpResponse ScriptedTransport::post_json(const std::string& url, const HeaderList&,
                                          const std::string& body) {
  try {
    json req = json::parse(body);
    json out;
    if (url.find("/v1/nli") != std::string::npos)
      out = handle_nli(req);
    else if (url.find("/v1/embed") != std::string::npos)
      out = handle_embedding(req);
    else if (url.find("/v1/chat") != std::string::npos)
      out = handle_generation(req);
    else
      return {404, "unknown scripted endpoint " + url};
    return {200, out.dump()};
  } catch (const std::exception& e) {
    return {500, std::string("scenario error: ") + e.what()};
  }
}

json provider_blocks(bool with_urls) {
  json gen{{"kind", "generation"}, {"model", "sim-gen"}, {"parallelism", 1}};
  json nli{{"kind", "nli"}, {"model", "sim-nli"}, {"parallelism", 1}};
  json emb{{"kind", "embedding"}, {"model", "sim-embed"}, {"parallelism", 1}};
  if (with_urls) {
    gen["url"] = "http://sim.local/v1/chat";
    nli["url"] = "http://sim.local/v1/nli";
    emb["url"] = "http://sim.local/v1/embed";
  }
  return json{{"generation", gen}, {"nli", nli}, {"embedding", emb}};
}

json dataset_rows() {
  json rows = json::array();
  for (const auto& w : subjects())
    rows.push_back(json{{"prompt_id", w.prompt_id},
                        {"prompt", w.prompt},
                        {"reference_text", w.reference_text}});
  return rows;
}

namespace {

json base_config(bool uad) {
  return json{{"dataset", "prompts.jsonl"},
              {"run_dir", "out"},
              {"replay_mode", "strict_replay"},
              {"replay_store", "replay_store.jsonl"},
              {"m", kSamples},
              {"m_qa", kQaSamples},
              {"q", 1},
              {"temperature", 1.0},
              {"tau_claim", 0.5},
              {"uad", uad},
              {"parallelism", 1},
              {"providers", provider_blocks(false)},
              {"scorers", json::array()}};
}

json scorer_json(const char* family, const char* gran, const char* eta, int q = 0) {
  json s{{"family", family}, {"granularity", gran}, {"eta", eta}};
  if (q > 0) s["q"] = q;
  return s;
}

}  // namespace

std::vector<NamedRunConfig> fixture_run_configs() {
  std::vector<NamedRunConfig> out;

  {
    NamedRunConfig e2e;
    e2e.name = "e2e";
    e2e.full_pipeline = true;
    e2e.needs_aggregate = true;
    e2e.config = base_config(true);
    e2e.config["scorers"] = json::array({
        scorer_json("unit_response", "claim", "entailment"),
        scorer_json("matched_unit", "sent", "normalized_cosine"),
        scorer_json("unit_qa", "claim", "non_contradiction", 1),
        scorer_json("graph_based", "claim", "closeness"),
    });
    out.push_back(std::move(e2e));
  }

  struct FamilySpec {
    const char* name;
    json s;
    bool claim_level;
  };
  const std::vector<FamilySpec> families = {
      {"claim_response", scorer_json("unit_response", "claim", "entailment"), true},
      {"graph", scorer_json("graph_based", "claim", "closeness"), true},
      {"claim_qa", scorer_json("unit_qa", "claim", "non_contradiction", 1), true},
      {"sent_response", scorer_json("unit_response", "sent", "entailment"), false},
      {"matched_sent", scorer_json("matched_unit", "sent", "normalized_cosine"), false},
      {"sent_qa", scorer_json("unit_qa", "sent", "non_contradiction", 2), false},
  };
  for (const auto& f : families) {
    NamedRunConfig run;
    run.name = std::string("audit_") + f.name;
    run.config = base_config(false);
    run.config["scorers"] = json::array({f.s});
    out.push_back(std::move(run));
  }
  for (const auto& f : families) {
    if (!f.claim_level) continue;
    NamedRunConfig run;
    run.name = std::string("audit_") + f.name + "_uad";
    run.needs_aggregate = true;
    run.config = base_config(true);
    run.config["scorers"] = json::array({f.s});
    out.push_back(std::move(run));
  }
  return out;
}

}  // namespace credence::scenario
