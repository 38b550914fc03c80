#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gicert {

// Undirected simple graph. Edges are stored once with u < v; no self loops.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> features;  // row-major n x feature_dim, empty if absent
  int feature_dim = 0;
  std::vector<int> labels;  // length n, empty if absent
  int num_classes = 0;

  bool has_features() const { return feature_dim > 0; }
  bool has_labels() const { return !labels.empty(); }
  void add_edge(int u, int v);
  void validate() const;  // throws std::invalid_argument on broken invariants
};

// CSR adjacency of an n-node edge set.
struct Adjacency {
  std::vector<int> offsets;  // n+1
  std::vector<int> neighbors;

  int degree(int v) const { return offsets[v + 1] - offsets[v]; }
};

Adjacency build_adjacency(int n, const std::vector<std::pair<int, int>>& edges);
inline Adjacency build_adjacency(const Graph& g) { return build_adjacency(g.n, g.edges); }

// Attack budget: up to rho injected nodes, each with degree at most tau,
// against a k-layer message-passing model.
struct ThreatModel {
  int rho = 0;
  int tau = 0;
  int k = 2;

  void validate() const;
  // Degree cannot exceed the number of available endpoints.
  int effective_tau(int n) const;
};

// Block decomposition of an injection: a1 holds injected-to-existing edges
// (rho x n, row-major), a2 the injected-internal edges (rho x rho, symmetric,
// zero diagonal).
struct AttackVariables {
  int rho = 0;
  std::vector<std::uint8_t> a1;
  std::vector<std::uint8_t> a2;

  static AttackVariables empty(int rho, int n);
  std::uint8_t a1_at(int i, int j, int n) const { return a1[static_cast<std::size_t>(i) * n + j]; }
  std::uint8_t a2_at(int i, int j) const { return a2[static_cast<std::size_t>(i) * rho + j]; }
  void set_a1(int i, int j, int n, std::uint8_t bit) { a1[static_cast<std::size_t>(i) * n + j] = bit; }
  void set_a2(int i, int j, std::uint8_t bit);
  int injected_degree(int i, int n) const;
  // Checks shape, symmetry, zero diagonal, and per-node degree against tau.
  void validate(const Graph& g, const ThreatModel& threat) const;
};

// Composed (n+rho)-node adjacency of the attacked graph.
Adjacency build_composed_adjacency(const Graph& g, const AttackVariables& attack);

// Walk counts (||A^i_{n:(n+rho),v}||_1 for i = 1..k): entry i-1 is the number
// of (i)-step walks from the injected block ending at v, computed by iterated
// sparse matrix-vector products on the composed adjacency. Counts use 64-bit
// integers; overflow is a hard error.
std::vector<std::uint64_t> path_counts_to_target(const Graph& g, const AttackVariables& attack,
                                                 int v, int k);

// Same counts on a prebuilt composed adjacency (nodes >= n_existing form the
// injected block).
std::vector<std::uint64_t> injected_walk_counts(const Adjacency& composed, int n_existing,
                                                int v, int k);

// Second-order counts for every existing node via the block identity
// (A1*A0 + A2*A1)^T 1_rho, without forming the composed matrix.
std::vector<std::uint64_t> second_order_counts_block(const Graph& g,
                                                     const AttackVariables& attack);

}  // namespace gicert
