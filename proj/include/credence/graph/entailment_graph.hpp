#pragma once

#include <string>
#include <utility>
#include <vector>

#include "credence/decomposition/units.hpp"
#include "credence/providers/types.hpp"

namespace credence {

// Bipartite graph over unique claims and sampled responses. Claims occupy
// node slots 0..C-1, responses C..C+m-1; edges are only ever claim-response,
// so the graph is strictly bipartite by construction.
struct EntailmentGraph {
  std::vector<Unit> claim_nodes;
  std::vector<std::string> response_ids;
  std::vector<std::string> response_texts;
  std::vector<std::pair<int, int>> edges;  // (claim index, response index)

  int num_claims() const { return static_cast<int>(claim_nodes.size()); }
  int num_responses() const { return static_cast<int>(response_ids.size()); }
  int num_nodes() const { return num_claims() + num_responses(); }

  // Combined-index adjacency lists (claims first, then responses).
  std::vector<std::vector<int>> adjacency() const;
};

// An edge (s, y) exists iff nli(y, s).p_entail > edge_threshold; exactly
// |claims| * |responses| NLI calls, claim-major order.
EntailmentGraph build_graph(NliProvider& nli, const ClaimUnion& claims,
                            const std::vector<std::string>& response_ids,
                            const std::vector<std::string>& response_texts,
                            double edge_threshold = 0.5, int parallelism = 8);

}  // namespace credence
