#pragma once

#include <string>
#include <vector>

#include "credence/graph/entailment_graph.hpp"

namespace credence {

struct ClaimCentrality {
  double betweenness = 0.0;
  double closeness = 0.0;
  double harmonic = 0.0;
  double laplacian = 0.0;
  double pagerank = 0.0;
  bool disconnected = false;  // some node was unreachable from this claim
};

struct CentralityReport {
  std::vector<ClaimCentrality> per_claim;  // aligned with graph.claim_nodes
  std::vector<std::string> warnings;
};

// Largest attainable raw betweenness of a claim in this bipartite family;
// used to normalize into [0,1]. Can be nonpositive for degenerate tiny
// graphs, in which case betweenness is defined as 0.
double betweenness_normalizer(int num_claims, int num_responses);

// Largest attainable inverse-distance sum for a claim: every response at
// distance 1, every other claim at distance 2.
double harmonic_normalizer(int num_claims, int num_responses);

double betweenness(const EntailmentGraph& g, int claim_index);
double closeness(const EntailmentGraph& g, int claim_index);
double harmonic(const EntailmentGraph& g, int claim_index);
double laplacian(const EntailmentGraph& g, int claim_index);

// Power iteration with uniform dangling redistribution; scores over all
// nodes (claims first) and sum to 1. Throws ConvergenceError when the L1
// change is still above tol after max_iters rounds.
std::vector<double> pagerank(const EntailmentGraph& g, double damping = 0.85, int max_iters = 200,
                             double tol = 1e-10);

CentralityReport centrality_report(const EntailmentGraph& g, double damping = 0.85);

}  // namespace credence
