#include "credence/consistency/clusters.hpp"

#include <cmath>

#include "credence/errors.hpp"

namespace credence {

std::vector<int> ClusterSet::counts() const {
  std::vector<int> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(static_cast<int>(m.size()));
  return out;
}

ClusterSet cluster_bidirectional(NliProvider& nli, const std::vector<std::string>& responses,
                                 double entail_threshold) {
  ClusterSet set;
  set.n = static_cast<int>(responses.size());
  for (int i = 0; i < set.n; ++i) {
    bool placed = false;
    for (auto& cluster : set.members) {
      const std::string& rep = responses[static_cast<size_t>(cluster.front())];
      if (nli.nli(rep, responses[static_cast<size_t>(i)]).p_entail > entail_threshold &&
          nli.nli(responses[static_cast<size_t>(i)], rep).p_entail > entail_threshold) {
        cluster.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) set.members.push_back({i});
  }
  return set;
}

double semantic_negentropy(const ClusterSet& clusters) {
  if (clusters.n < 1) throw Error("semantic_negentropy: needs at least one response");
  if (clusters.n == 1) return 1.0;
  double h = 0.0;
  for (int count : clusters.counts()) {
    if (count == 0) continue;
    double p = static_cast<double>(count) / clusters.n;
    h -= p * std::log(p);
  }
  double score = 1.0 - h / std::log(static_cast<double>(clusters.n));
  // Guard rounding at the boundaries.
  if (score < 0.0) return 0.0;
  if (score > 1.0) return 1.0;
  return score;
}

}  // namespace credence
