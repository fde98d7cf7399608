#include "credence/graph/entailment_graph.hpp"

#include "credence/errors.hpp"
#include "credence/parallel.hpp"

namespace credence {

std::vector<std::vector<int>> EntailmentGraph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<size_t>(num_nodes()));
  for (const auto& [c, r] : edges) {
    adj[static_cast<size_t>(c)].push_back(num_claims() + r);
    adj[static_cast<size_t>(num_claims() + r)].push_back(c);
  }
  return adj;
}

EntailmentGraph build_graph(NliProvider& nli, const ClaimUnion& claims,
                            const std::vector<std::string>& response_ids,
                            const std::vector<std::string>& response_texts,
                            double edge_threshold, int parallelism) {
  if (claims.claims.empty()) throw Error("build_graph: claim union is empty");
  if (response_ids.empty() || response_ids.size() != response_texts.size())
    throw Error("build_graph: response ids/texts mismatch or empty");

  EntailmentGraph g;
  g.claim_nodes = claims.claims;
  g.response_ids = response_ids;
  g.response_texts = response_texts;

  const int n_claims = g.num_claims();
  const int n_resp = g.num_responses();
  std::vector<char> entailed(static_cast<size_t>(n_claims) * n_resp, 0);
  parallel_for(static_cast<size_t>(n_claims) * n_resp, parallelism, [&](size_t idx) {
    int c = static_cast<int>(idx) / n_resp;
    int r = static_cast<int>(idx) % n_resp;
    try {
      NliJudgment j = nli.nli(response_texts[static_cast<size_t>(r)],
                              g.claim_nodes[static_cast<size_t>(c)].text);
      entailed[idx] = j.p_entail > edge_threshold ? 1 : 0;
    } catch (const Error& e) {
      throw Error("build_graph: nli failed for claim '" + g.claim_nodes[static_cast<size_t>(c)].id +
                  "' vs response '" + response_ids[static_cast<size_t>(r)] + "': " + e.what());
    }
  });
  for (int c = 0; c < n_claims; ++c)
    for (int r = 0; r < n_resp; ++r)
      if (entailed[static_cast<size_t>(c) * n_resp + r]) g.edges.emplace_back(c, r);
  return g;
}

}  // namespace credence
