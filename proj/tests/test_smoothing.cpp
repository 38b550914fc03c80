#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gicert/rng.hpp"
#include "gicert/smoothing.hpp"

using namespace gicert;

namespace {

Graph matching_graph(int pairs) {
  Graph g;
  g.n = 2 * pairs;
  for (int i = 0; i < pairs; ++i) g.add_edge(2 * i, 2 * i + 1);
  return g;
}

}  // namespace

TEST_CASE("survival probability is the joint keep mass of a path") {
  SmoothingParams params{0.9, 0.8};
  CHECK(survival_probability(params, 1) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(survival_probability(params, 2) == doctest::Approx(0.0004).epsilon(1e-12));
  CHECK(survival_probability(SmoothingParams{1.0, 0.3}, 5) == 0.0);
  CHECK_THROWS_AS(survival_probability(params, 0), std::invalid_argument);
}

TEST_CASE("degenerate deletion probabilities") {
  Graph g = matching_graph(8);
  const SampledGraph keep_all = sample(g, SmoothingParams{0.0, 0.0}, 7);
  for (auto b : keep_all.node_kept) CHECK(b == 1);
  for (auto b : keep_all.edge_kept) CHECK(b == 1);

  const SampledGraph drop_edges = sample(g, SmoothingParams{1.0, 0.0}, 7);
  for (std::size_t e = 0; e < g.edges.size(); ++e) CHECK_FALSE(drop_edges.edge_live(e));
}

TEST_CASE("sampling is deterministic in the seed") {
  Graph g = matching_graph(32);
  SmoothingParams params{0.4, 0.3};
  const SampledGraph a = sample(g, params, 123);
  const SampledGraph b = sample(g, params, 123);
  CHECK(a.node_kept == b.node_kept);
  CHECK(a.edge_kept == b.edge_kept);
  const SampledGraph c = sample(g, params, 124);
  CHECK(a.edge_kept != c.edge_kept);
}

TEST_CASE("live-edge count matches the independence expectation") {
  // Disjoint edges keep the per-edge liveness draws independent, so the count
  // is Bin(1000, keep_e * keep_n^2).
  Graph g = matching_graph(1000);
  SmoothingParams params{0.5, 0.5};
  const int runs = 10000;
  double total = 0;
  for (int r = 0; r < runs; ++r) {
    const SampledGraph sg = sample(g, params, hash_combine(42, r));
    int live = 0;
    for (std::size_t e = 0; e < g.edges.size(); ++e) live += sg.edge_live(e);
    total += live;
  }
  const double p_live = 0.5 * 0.25;
  const double mean = total / runs;
  const double sigma_mean = std::sqrt(1000.0 * p_live * (1 - p_live)) / std::sqrt(runs);
  CHECK(std::abs(mean - 125.0) <= 4.0 * sigma_mean);
}

TEST_CASE("marginal deletion rates stay within four sigma") {
  Graph g = matching_graph(3);
  SmoothingParams params{0.35, 0.6};
  const int runs = 10000;
  int edge0_deleted = 0, node2_deleted = 0;
  for (int r = 0; r < runs; ++r) {
    const SampledGraph sg = sample(g, params, hash_combine(9, r));
    edge0_deleted += sg.edge_kept[0] == 0;
    node2_deleted += sg.node_kept[2] == 0;
  }
  const auto sigma = [&](double p) { return std::sqrt(p * (1 - p) / runs); };
  CHECK(std::abs(edge0_deleted / double(runs) - params.p_e) <= 4 * sigma(params.p_e));
  CHECK(std::abs(node2_deleted / double(runs) - params.p_n) <= 4 * sigma(params.p_n));
}

TEST_CASE("mask bits are empirically uncorrelated") {
  Graph g = matching_graph(4);
  SmoothingParams params{0.5, 0.5};
  const int runs = 10000;
  double se = 0, sn = 0, sen = 0;
  for (int r = 0; r < runs; ++r) {
    const SampledGraph sg = sample(g, params, hash_combine(77, r));
    se += sg.edge_kept[1];
    sn += sg.node_kept[5];
    sen += sg.edge_kept[1] * sg.node_kept[5];
  }
  se /= runs;
  sn /= runs;
  sen /= runs;
  const double corr = (sen - se * sn) / std::sqrt(se * (1 - se) * sn * (1 - sn));
  CHECK(std::abs(corr) <= 4.0 / std::sqrt(double(runs)));
}

TEST_CASE("deleted endpoints kill incident edges in the live view") {
  Graph g;
  g.n = 3;
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  SampledGraph sg;
  sg.g = &g;
  sg.node_kept = {1, 0, 1};
  sg.edge_kept = {1, 1};
  CHECK_FALSE(sg.edge_live(0));
  CHECK_FALSE(sg.edge_live(1));
  const Adjacency live = sg.live_adjacency();
  CHECK(live.neighbors.empty());
}

TEST_CASE("parameter validation") {
  const SmoothingParams bad_e{-0.1, 0.5};
  const SmoothingParams bad_n{0.5, 1.2};
  const SmoothingParams zero_e{0.0, 0.5};
  const SmoothingParams ok{0.5, 0.5};
  CHECK_THROWS_AS(bad_e.validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad_n.validate(), std::invalid_argument);
  CHECK_THROWS_AS(zero_e.validate_for_certification(), std::invalid_argument);
  CHECK_NOTHROW(ok.validate_for_certification());
}
