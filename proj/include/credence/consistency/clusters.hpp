#pragma once

#include <string>
#include <vector>

#include "credence/providers/types.hpp"

namespace credence {

// Partition of response indices 0..n-1 into clusters of mutually entailing
// responses.
struct ClusterSet {
  std::vector<std::vector<int>> members;
  int n = 0;

  std::vector<int> counts() const;
};

// Greedy single pass: each response joins the first cluster whose
// representative (first member) it mutually entails — p_entail above
// entail_threshold in both directions — otherwise it founds a new cluster.
// O(n * #clusters) NLI calls.
ClusterSet cluster_bidirectional(NliProvider& nli, const std::vector<std::string>& responses,
                                 double entail_threshold = 0.5);

// 1 - H/ln(n) with H the entropy of cluster frequencies; 1.0 when all
// responses agree (including the single-response case), 0.0 when every
// response is its own cluster.
double semantic_negentropy(const ClusterSet& clusters);

}  // namespace credence
