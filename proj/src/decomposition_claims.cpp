#include "credence/decomposition/claims.hpp"

#include <sstream>
#include <unordered_set>

#include "credence/errors.hpp"
#include "credence/text.hpp"

namespace credence {

namespace {

std::vector<std::string> split_lines(const std::string& raw) {
  std::vector<std::string> lines;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::vector<std::string> parse_hash_items(const std::string& raw) {
  std::vector<std::string> items;
  for (const auto& line : split_lines(raw)) {
    std::string t = trim(line);
    if (t.rfind("###", 0) != 0) continue;
    size_t pos = 0;
    while (pos != std::string::npos) {
      size_t next = t.find("###", pos + 3);
      std::string piece =
          trim(t.substr(pos + 3, next == std::string::npos ? std::string::npos : next - pos - 3));
      if (!piece.empty()) items.push_back(std::move(piece));
      pos = next;
    }
  }
  return items;
}

std::vector<std::string> parse_dash_items(const std::string& raw) {
  std::vector<std::string> items;
  for (const auto& line : split_lines(raw)) {
    std::string t = trim(line);
    if (t.empty() || t[0] != '-') continue;
    std::string piece = trim(t.substr(1));
    if (!piece.empty()) items.push_back(std::move(piece));
  }
  return items;
}

DecomposedResponse extract_claims(TextGenerator& generator, const PromptLibrary& prompts,
                                  const std::string& response_id,
                                  const std::string& response_text) {
  DecomposedResponse out;
  out.response_id = response_id;
  out.granularity = Granularity::Claim;
  if (trim(response_text).empty()) return out;

  GenerationRequest req;
  req.prompt = prompts.render(template_ids::kClaimDecomposition, {{"response", response_text}});
  req.n_samples = 1;
  req.temperature = 0.0;
  std::string raw = generator.generate(req).at(0);

  auto items = parse_hash_items(raw);
  if (items.empty()) throw FormatError("claim extraction produced no \"###\" lines", raw);
  if (items.size() == 1 && ascii_lower(items[0]) == "none") return out;

  std::unordered_set<std::string> seen;
  int ordinal = 0;
  for (auto& text : items) {
    std::string norm = normalize_claim(text);
    if (norm.empty() || !seen.insert(norm).second) continue;
    Unit u;
    u.id = make_unit_id(response_id, Granularity::Claim, ordinal);
    u.text = std::move(text);
    u.granularity = Granularity::Claim;
    u.source_response = response_id;
    u.ordinal = ordinal;
    out.units.push_back(std::move(u));
    ++ordinal;
  }
  return out;
}

ClaimUnion seed_claim_union(const DecomposedResponse& claims) {
  ClaimUnion u;
  for (const auto& c : claims.units) {
    u.claims.push_back(c);
    u.provenance[c.id] = {claims.response_id};
  }
  return u;
}

ClaimUnion merge_claims(TextGenerator& generator, const PromptLibrary& prompts,
                        const ClaimUnion& master, const std::vector<Unit>& new_claims,
                        const std::string& contributor_id, const std::string& id_prefix) {
  auto bulleted = [](const auto& units) {
    std::string s;
    for (const auto& u : units) {
      s += "- ";
      s += u.text;
      s += "\n";
    }
    if (!s.empty()) s.pop_back();
    return s;
  };

  GenerationRequest req;
  req.prompt = prompts.render(template_ids::kClaimMerge,
                              {{"master_claim_str", bulleted(master.claims)},
                               {"sampled_claim_str", bulleted(new_claims)}});
  req.n_samples = 1;
  req.temperature = 0.0;
  std::string raw = generator.generate(req).at(0);
  if (trim(raw).empty())
    throw FormatError("claim merge returned an empty payload", raw);

  ClaimUnion out = master;

  // Claims the model judged covered: attribute provenance where they match an
  // existing union claim textually.
  auto additions = parse_dash_items(raw);
  std::unordered_set<std::string> added_norms;
  for (const auto& a : additions) added_norms.insert(normalize_claim(a));
  for (const auto& nc : new_claims) {
    std::string norm = normalize_claim(nc.text);
    if (added_norms.count(norm)) continue;
    if (const Unit* existing = out.find_normalized(norm))
      out.provenance[existing->id].insert(contributor_id);
  }

  for (auto& text : additions) {
    std::string norm = normalize_claim(text);
    if (norm.empty()) continue;
    if (const Unit* existing = out.find_normalized(norm)) {
      out.provenance[existing->id].insert(contributor_id);
      continue;
    }
    Unit u;
    u.id = id_prefix + "#claim" + std::to_string(out.claims.size());
    u.text = std::move(text);
    u.granularity = Granularity::Claim;
    u.source_response = contributor_id;
    u.ordinal = static_cast<int>(out.claims.size());
    out.provenance[u.id] = {contributor_id};
    out.claims.push_back(std::move(u));
  }
  return out;
}

}  // namespace credence
