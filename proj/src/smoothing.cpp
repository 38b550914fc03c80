#include "gicert/smoothing.hpp"

#include <cmath>
#include <stdexcept>

#include "gicert/rng.hpp"

namespace gicert {

void SmoothingParams::validate() const {
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw std::invalid_argument("p_e must lie in [0,1]");
  if (!(p_n >= 0.0 && p_n <= 1.0)) throw std::invalid_argument("p_n must lie in [0,1]");
}

void SmoothingParams::validate_for_certification() const {
  validate();
  if (!(p_e > 0.0) || !(p_n > 0.0))
    throw std::invalid_argument("certification requires p_e > 0 and p_n > 0");
}

Adjacency SampledGraph::live_adjacency() const {
  std::vector<std::pair<int, int>> live;
  live.reserve(g->edges.size());
  for (std::size_t e = 0; e < g->edges.size(); ++e)
    if (edge_live(e)) live.push_back(g->edges[e]);
  return build_adjacency(g->n, live);
}

SampledGraph sample(const Graph& g, const SmoothingParams& params, std::uint64_t seed) {
  params.validate();
  SampledGraph sg;
  sg.g = &g;
  sg.node_kept.resize(g.n);
  sg.edge_kept.resize(g.edges.size());
  const std::uint64_t edge_seed = hash_combine(seed, stream::kEdge);
  const std::uint64_t node_seed = hash_combine(seed, stream::kNode);
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    sg.edge_kept[e] = u01(hash_combine(edge_seed, e)) >= params.p_e;
  for (int v = 0; v < g.n; ++v)
    sg.node_kept[v] = u01(hash_combine(node_seed, static_cast<std::uint64_t>(v))) >= params.p_n;
  return sg;
}

double survival_probability(const SmoothingParams& params, int path_len) {
  if (path_len < 1) throw std::invalid_argument("path length must be at least 1");
  return std::pow(params.keep_e() * params.keep_n(), path_len);
}

}  // namespace gicert
