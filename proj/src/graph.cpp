#include "gicert/graph.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace gicert {

void Graph::add_edge(int u, int v) {
  if (u == v) throw std::invalid_argument("self loop (" + std::to_string(u) + ")");
  if (u > v) std::swap(u, v);
  edges.emplace_back(u, v);
  if (v >= n) n = v + 1;
}

void Graph::validate() const {
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self loop");
    if (u > v) throw std::invalid_argument("edge not normalized");
    if (!seen.insert({u, v}).second) throw std::invalid_argument("duplicate edge");
  }
  if (feature_dim > 0 && features.size() != static_cast<std::size_t>(n) * feature_dim)
    throw std::invalid_argument("feature row count does not equal n");
  if (!labels.empty()) {
    if (labels.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("label count does not equal n");
    for (int y : labels)
      if (y < 0 || y >= num_classes) throw std::invalid_argument("label out of range");
  }
}

Adjacency build_adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  Adjacency adj;
  adj.offsets.assign(n + 1, 0);
  for (const auto& [u, v] : edges) {
    ++adj.offsets[u + 1];
    ++adj.offsets[v + 1];
  }
  for (int i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
  adj.neighbors.resize(adj.offsets[n]);
  std::vector<int> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& [u, v] : edges) {
    adj.neighbors[cursor[u]++] = v;
    adj.neighbors[cursor[v]++] = u;
  }
  return adj;
}

void ThreatModel::validate() const {
  if (rho < 0 || tau < 0) throw std::invalid_argument("rho and tau must be nonnegative");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
}

int ThreatModel::effective_tau(int n) const {
  return std::min<long long>(tau, static_cast<long long>(n) + rho - 1);
}

AttackVariables AttackVariables::empty(int rho, int n) {
  AttackVariables a;
  a.rho = rho;
  a.a1.assign(static_cast<std::size_t>(rho) * n, 0);
  a.a2.assign(static_cast<std::size_t>(rho) * rho, 0);
  return a;
}

void AttackVariables::set_a2(int i, int j, std::uint8_t bit) {
  if (i == j) throw std::invalid_argument("a2 diagonal is fixed to zero");
  a2[static_cast<std::size_t>(i) * rho + j] = bit;
  a2[static_cast<std::size_t>(j) * rho + i] = bit;
}

int AttackVariables::injected_degree(int i, int n) const {
  int d = 0;
  for (int j = 0; j < n; ++j) d += a1_at(i, j, n);
  for (int j = 0; j < rho; ++j) d += a2_at(i, j);
  return d;
}

void AttackVariables::validate(const Graph& g, const ThreatModel& threat) const {
  if (rho != threat.rho) throw std::invalid_argument("attack rho does not match threat model");
  if (a1.size() != static_cast<std::size_t>(rho) * g.n || a2.size() != static_cast<std::size_t>(rho) * rho)
    throw std::invalid_argument("attack block dimensions do not match graph");
  for (int i = 0; i < rho; ++i) {
    if (a2_at(i, i) != 0) throw std::invalid_argument("a2 diagonal must be zero");
    for (int j = 0; j < i; ++j)
      if (a2_at(i, j) != a2_at(j, i)) throw std::invalid_argument("a2 must be symmetric");
    if (injected_degree(i, g.n) > threat.effective_tau(g.n))
      throw std::invalid_argument("injected node " + std::to_string(i) + " exceeds tau");
  }
}

Adjacency build_composed_adjacency(const Graph& g, const AttackVariables& attack) {
  const int n = g.n;
  const int total = n + attack.rho;
  std::vector<std::pair<int, int>> edges = g.edges;
  for (int i = 0; i < attack.rho; ++i) {
    for (int j = 0; j < n; ++j)
      if (attack.a1_at(i, j, n)) edges.emplace_back(j, n + i);
    for (int j = i + 1; j < attack.rho; ++j)
      if (attack.a2_at(i, j)) edges.emplace_back(n + i, n + j);
  }
  return build_adjacency(total, edges);
}

namespace {

// w <- A w on CSR, checking for 64-bit overflow.
void checked_matvec(const Adjacency& adj, std::vector<std::uint64_t>& w,
                    std::vector<std::uint64_t>& scratch) {
  constexpr std::uint64_t kLimit = std::uint64_t(1) << 62;
  const int total = static_cast<int>(adj.offsets.size()) - 1;
  scratch.assign(total, 0);
  for (int u = 0; u < total; ++u) {
    std::uint64_t acc = 0;
    for (int e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) {
      acc += w[adj.neighbors[e]];
      if (acc > kLimit) throw std::overflow_error("walk count overflow");
    }
    scratch[u] = acc;
  }
  w.swap(scratch);
}

}  // namespace

std::vector<std::uint64_t> injected_walk_counts(const Adjacency& composed, int n_existing,
                                                int v, int k) {
  const int total = static_cast<int>(composed.offsets.size()) - 1;
  if (v < 0 || v >= n_existing) throw std::invalid_argument("target node out of range");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  std::vector<std::uint64_t> counts(k, 0);
  if (total == n_existing) return counts;
  std::vector<std::uint64_t> w(total, 0), scratch;
  w[v] = 1;
  for (int step = 0; step < k; ++step) {
    checked_matvec(composed, w, scratch);
    std::uint64_t block_sum = 0;
    for (int i = n_existing; i < total; ++i) {
      block_sum += w[i];
      if (block_sum > (std::uint64_t(1) << 62)) throw std::overflow_error("walk count overflow");
    }
    counts[step] = block_sum;
  }
  return counts;
}

std::vector<std::uint64_t> path_counts_to_target(const Graph& g, const AttackVariables& attack,
                                                 int v, int k) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("target node out of range");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (attack.rho == 0) return std::vector<std::uint64_t>(k, 0);
  return injected_walk_counts(build_composed_adjacency(g, attack), g.n, v, k);
}

std::vector<std::uint64_t> second_order_counts_block(const Graph& g,
                                                     const AttackVariables& attack) {
  const int n = g.n;
  if (attack.a1.size() != static_cast<std::size_t>(attack.rho) * n)
    throw std::invalid_argument("a1 dimensions do not match graph");
  const Adjacency adj = build_adjacency(g);
  std::vector<std::uint64_t> out(n, 0);
  // (A1*A0)[i,v] walks i -> u -> v with u existing.
  for (int i = 0; i < attack.rho; ++i)
    for (int u = 0; u < n; ++u)
      if (attack.a1_at(i, u, n))
        for (int e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) ++out[adj.neighbors[e]];
  // (A2*A1)[i,v] walks i -> j -> v with j injected.
  for (int i = 0; i < attack.rho; ++i)
    for (int j = 0; j < attack.rho; ++j)
      if (attack.a2_at(i, j))
        for (int v = 0; v < n; ++v)
          if (attack.a1_at(j, v, n)) ++out[v];
  return out;
}

}  // namespace gicert
