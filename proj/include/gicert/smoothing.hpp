#pragma once

#include <cstdint>
#include <vector>

#include "gicert/graph.hpp"

namespace gicert {

// Randomization scheme: delete each edge with probability p_e and each node
// (with its incident edges) with probability p_n, independently.
struct SmoothingParams {
  double p_e = 0.0;
  double p_n = 0.0;

  double keep_e() const { return 1.0 - p_e; }
  double keep_n() const { return 1.0 - p_n; }
  void validate() const;                 // probabilities in [0,1]
  void validate_for_certification() const;  // additionally p_e > 0 and p_n > 0
};

// One draw from the smoothing distribution. A deleted node keeps its feature
// row but loses all incident edges; an edge is live iff its own bit is set
// and both endpoints are kept.
struct SampledGraph {
  const Graph* g = nullptr;
  std::vector<std::uint8_t> node_kept;
  std::vector<std::uint8_t> edge_kept;

  bool edge_live(std::size_t e) const {
    const auto& [u, v] = g->edges[e];
    return edge_kept[e] && node_kept[u] && node_kept[v];
  }
  // CSR adjacency over live edges only.
  Adjacency live_adjacency() const;
};

// Deterministic given (g, params, seed), independent of evaluation order.
SampledGraph sample(const Graph& g, const SmoothingParams& params, std::uint64_t seed);

// (keep_e * keep_n)^path_len: probability that a path of the given length is
// not intercepted (one node bit per edge; the target endpoint is exempt).
double survival_probability(const SmoothingParams& params, int path_len);

}  // namespace gicert
