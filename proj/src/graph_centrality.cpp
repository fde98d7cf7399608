#include "credence/graph/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "credence/errors.hpp"

namespace credence {

namespace {

struct BfsResult {
  std::vector<int> dist;  // -1 = unreachable
  std::vector<double> sigma;
};

BfsResult bfs(const std::vector<std::vector<int>>& adj, int source) {
  BfsResult r;
  r.dist.assign(adj.size(), -1);
  r.sigma.assign(adj.size(), 0.0);
  r.dist[static_cast<size_t>(source)] = 0;
  r.sigma[static_cast<size_t>(source)] = 1.0;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : adj[static_cast<size_t>(v)]) {
      if (r.dist[static_cast<size_t>(w)] < 0) {
        r.dist[static_cast<size_t>(w)] = r.dist[static_cast<size_t>(v)] + 1;
        queue.push_back(w);
      }
      if (r.dist[static_cast<size_t>(w)] == r.dist[static_cast<size_t>(v)] + 1)
        r.sigma[static_cast<size_t>(w)] += r.sigma[static_cast<size_t>(v)];
    }
  }
  return r;
}

// Brandes accumulation over all sources; raw betweenness per node, unordered
// pairs, endpoints excluded.
std::vector<double> raw_betweenness_all(const std::vector<std::vector<int>>& adj) {
  const size_t n = adj.size();
  std::vector<double> bc(n, 0.0);
  for (size_t s = 0; s < n; ++s) {
    std::vector<int> dist(n, -1);
    std::vector<double> sigma(n, 0.0);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    order.reserve(n);
    dist[s] = 0;
    sigma[s] = 1.0;
    std::deque<int> queue{static_cast<int>(s)};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int w : adj[static_cast<size_t>(v)]) {
        if (dist[static_cast<size_t>(w)] < 0) {
          dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(v)] + 1;
          queue.push_back(w);
        }
        if (dist[static_cast<size_t>(w)] == dist[static_cast<size_t>(v)] + 1) {
          sigma[static_cast<size_t>(w)] += sigma[static_cast<size_t>(v)];
          preds[static_cast<size_t>(w)].push_back(v);
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int v = *it;
      for (int p : preds[static_cast<size_t>(v)])
        delta[static_cast<size_t>(p)] += sigma[static_cast<size_t>(p)] /
                                         sigma[static_cast<size_t>(v)] *
                                         (1.0 + delta[static_cast<size_t>(v)]);
      if (static_cast<size_t>(v) != s) bc[static_cast<size_t>(v)] += delta[static_cast<size_t>(v)];
    }
  }
  for (double& b : bc) b /= 2.0;  // ordered pairs -> unordered
  return bc;
}

void check_claim_index(const EntailmentGraph& g, int claim_index) {
  if (claim_index < 0 || claim_index >= g.num_claims())
    throw Error("centrality: claim index " + std::to_string(claim_index) + " out of range");
}

double normalize_betweenness(double raw, double b_max, std::vector<std::string>* warnings,
                             const std::string& claim_id) {
  if (b_max <= 0.0) {
    if (warnings)
      warnings->push_back("betweenness normalizer nonpositive for this graph size; claim " +
                          claim_id + " reported as 0");
    return 0.0;
  }
  double score = raw / b_max;
  if (score > 1.0) {
    if (warnings)
      warnings->push_back("normalized betweenness " + std::to_string(score) + " > 1 for claim " +
                          claim_id + "; clamped");
    return 1.0;
  }
  return score < 0.0 ? 0.0 : score;
}

double closeness_from_bfs(const EntailmentGraph& g, int claim_index, const BfsResult& r) {
  const int n_claims = g.num_claims();
  const int n_nodes = g.num_nodes();
  long sum_dist = 0;
  int reachable = 0, reach_resp = 0, reach_claims = 0;
  for (int v = 0; v < n_nodes; ++v) {
    if (v == claim_index || r.dist[static_cast<size_t>(v)] < 0) continue;
    sum_dist += r.dist[static_cast<size_t>(v)];
    ++reachable;
    if (v < n_claims)
      ++reach_claims;
    else
      ++reach_resp;
  }
  if (reachable == 0 || sum_dist == 0) return 0.0;
  // Minimum possible distance sum over the nodes actually reached: responses
  // at distance 1, claims at distance 2. On a connected graph this is the
  // m + 2(|claims|-1) normalizer; the reachability scaling keeps [0,1] on
  // disconnected graphs.
  double min_possible = reach_resp + 2.0 * reach_claims;
  double scale = static_cast<double>(reachable) / (n_nodes - 1);
  return min_possible / static_cast<double>(sum_dist) * scale;
}

double harmonic_from_bfs(const EntailmentGraph& g, int claim_index, const BfsResult& r) {
  double sum = 0.0;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (v == claim_index) continue;
    int d = r.dist[static_cast<size_t>(v)];
    if (d > 0) sum += 1.0 / d;
  }
  return sum / harmonic_normalizer(g.num_claims(), g.num_responses());
}

std::vector<int> degrees(const EntailmentGraph& g) {
  std::vector<int> deg(static_cast<size_t>(g.num_nodes()), 0);
  for (const auto& [c, r] : g.edges) {
    ++deg[static_cast<size_t>(c)];
    ++deg[static_cast<size_t>(g.num_claims() + r)];
  }
  return deg;
}

// Laplacian energy via sum(deg^2) + 2|E|; equals the sum of squared
// Laplacian eigenvalues.
double laplacian_energy(const std::vector<int>& deg, long num_edges) {
  double e = 0.0;
  for (int d : deg) e += static_cast<double>(d) * d;
  return e + 2.0 * static_cast<double>(num_edges);
}

}  // namespace

double betweenness_normalizer(int num_claims, int num_responses) {
  const double m = num_responses;
  const double p = (num_claims - 1.0) / m;
  const double t = static_cast<double>((num_claims - 1) % num_responses);
  return 0.5 * (m * m * (p + 1.0) * (p + 1.0) + m * (p + 1.0) * (2.0 * t - p - 1.0) -
                t * (2.0 * p - t + 3.0));
}

double harmonic_normalizer(int num_claims, int num_responses) {
  return num_responses + (num_claims - 1.0) / 2.0;
}

double betweenness(const EntailmentGraph& g, int claim_index) {
  check_claim_index(g, claim_index);
  auto raw = raw_betweenness_all(g.adjacency());
  return normalize_betweenness(raw[static_cast<size_t>(claim_index)],
                               betweenness_normalizer(g.num_claims(), g.num_responses()), nullptr,
                               g.claim_nodes[static_cast<size_t>(claim_index)].id);
}

double closeness(const EntailmentGraph& g, int claim_index) {
  check_claim_index(g, claim_index);
  return closeness_from_bfs(g, claim_index, bfs(g.adjacency(), claim_index));
}

double harmonic(const EntailmentGraph& g, int claim_index) {
  check_claim_index(g, claim_index);
  return harmonic_from_bfs(g, claim_index, bfs(g.adjacency(), claim_index));
}

double laplacian(const EntailmentGraph& g, int claim_index) {
  check_claim_index(g, claim_index);
  auto deg = degrees(g);
  double total = laplacian_energy(deg, static_cast<long>(g.edges.size()));
  if (total == 0.0) return 0.0;

  const int removed_deg = deg[static_cast<size_t>(claim_index)];
  double remaining = 0.0;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (v == claim_index) continue;
    double d = deg[static_cast<size_t>(v)];
    // Claim nodes only neighbor responses, so removing the claim lowers each
    // neighbor's degree by exactly one.
    bool neighbor = false;
    if (v >= g.num_claims()) {
      int r = v - g.num_claims();
      for (const auto& e : g.edges)
        if (e.first == claim_index && e.second == r) {
          neighbor = true;
          break;
        }
    }
    if (neighbor) d -= 1.0;
    remaining += d * d;
  }
  remaining += 2.0 * (static_cast<double>(g.edges.size()) - removed_deg);
  return (total - remaining) / total;
}

std::vector<double> pagerank(const EntailmentGraph& g, double damping, int max_iters, double tol) {
  if (!(damping > 0.0 && damping < 1.0))
    throw Error("pagerank: damping must lie strictly between 0 and 1");
  const size_t n = static_cast<size_t>(g.num_nodes());
  auto adj = g.adjacency();
  auto deg = degrees(g);
  std::vector<double> pr(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  double change = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    double dangling = 0.0;
    for (size_t v = 0; v < n; ++v)
      if (deg[v] == 0) dangling += pr[v];
    const double base = (1.0 - damping) / static_cast<double>(n) +
                        damping * dangling / static_cast<double>(n);
    std::fill(next.begin(), next.end(), base);
    for (size_t v = 0; v < n; ++v) {
      if (deg[v] == 0) continue;
      double share = damping * pr[v] / deg[v];
      for (int w : adj[v]) next[static_cast<size_t>(w)] += share;
    }
    change = 0.0;
    for (size_t v = 0; v < n; ++v) change += std::fabs(next[v] - pr[v]);
    pr.swap(next);
    if (change < tol) return pr;
  }
  throw ConvergenceError("pagerank did not converge within " + std::to_string(max_iters) +
                             " iterations (residual " + std::to_string(change) + ")",
                         change);
}

CentralityReport centrality_report(const EntailmentGraph& g, double damping) {
  CentralityReport report;
  report.per_claim.resize(static_cast<size_t>(g.num_claims()));

  auto adj = g.adjacency();
  auto raw_bc = raw_betweenness_all(adj);
  const double b_max = betweenness_normalizer(g.num_claims(), g.num_responses());
  auto pr = pagerank(g, damping);
  auto deg = degrees(g);
  const double total_energy = laplacian_energy(deg, static_cast<long>(g.edges.size()));

  // Per-claim neighbor sets for the laplacian drop.
  std::vector<std::vector<int>> claim_neighbors(static_cast<size_t>(g.num_claims()));
  for (const auto& [c, r] : g.edges)
    claim_neighbors[static_cast<size_t>(c)].push_back(g.num_claims() + r);

  for (int c = 0; c < g.num_claims(); ++c) {
    auto& out = report.per_claim[static_cast<size_t>(c)];
    const auto r = bfs(adj, c);
    out.betweenness = normalize_betweenness(raw_bc[static_cast<size_t>(c)], b_max,
                                            &report.warnings,
                                            g.claim_nodes[static_cast<size_t>(c)].id);
    out.closeness = closeness_from_bfs(g, c, r);
    out.harmonic = harmonic_from_bfs(g, c, r);
    out.pagerank = pr[static_cast<size_t>(c)];

    if (total_energy == 0.0) {
      out.laplacian = 0.0;
    } else {
      double remaining = 0.0;
      const auto& nb = claim_neighbors[static_cast<size_t>(c)];
      for (int v = 0; v < g.num_nodes(); ++v) {
        if (v == c) continue;
        double d = deg[static_cast<size_t>(v)];
        if (std::find(nb.begin(), nb.end(), v) != nb.end()) d -= 1.0;
        remaining += d * d;
      }
      remaining += 2.0 * (static_cast<double>(g.edges.size()) - nb.size());
      out.laplacian = (total_energy - remaining) / total_energy;
    }

    int reachable = 0;
    for (int v = 0; v < g.num_nodes(); ++v)
      if (v != c && r.dist[static_cast<size_t>(v)] >= 0) ++reachable;
    out.disconnected = reachable < g.num_nodes() - 1;
  }
  return report;
}

}  // namespace credence
