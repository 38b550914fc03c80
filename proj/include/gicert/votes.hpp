#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gicert/classifier.hpp"
#include "gicert/smoothing.hpp"

namespace gicert {

// Per-node vote tallies over N smoothing samples, with the top-2 classes
// already resolved under the lowest-index tie rule.
struct VoteStats {
  int n = 0;
  int num_classes = 0;
  std::int64_t samples = 0;
  double alpha = 0.01;
  std::vector<std::uint32_t> counts;  // n x num_classes, row-major
  std::vector<int> y_a, y_b;
  std::vector<std::uint32_t> n_a, n_b;

  std::uint32_t count(int v, int y) const {
    return counts[static_cast<std::size_t>(v) * num_classes + y];
  }
  void resolve_top2();
};

struct NodeGap {
  int node = 0;
  int y_star = 0;
  double p_a_lower = 0.0;
  double p_b_upper = 1.0;
  double c = -1.0;  // p_a_lower - p_b_upper; nonpositive means abstain
};

// Confidence-bounded classification gaps plus the metadata needed to rerun
// certification without re-sampling.
struct GapVector {
  std::vector<NodeGap> nodes;
  int num_classes = 0;
  std::int64_t samples = 0;
  double alpha = 0.01;
  SmoothingParams params;
  std::uint64_t seed = 0;
  std::string generator;
};

// Monte Carlo vote estimation. Sample i uses sample_seed(seed, i), so the
// result is independent of the parallel schedule; threads <= 0 picks the
// default worker count.
VoteStats estimate_votes(const Graph& g, const BaseClassifier& model,
                         const SmoothingParams& params, std::int64_t samples,
                         std::uint64_t seed, double alpha = 0.01, int threads = 0);

// Serial reference implementation; must match estimate_votes bit for bit.
VoteStats estimate_votes_serial(const Graph& g, const BaseClassifier& model,
                                const SmoothingParams& params, std::int64_t samples,
                                std::uint64_t seed, double alpha = 0.01);

// One-sided Clopper-Pearson bounds, computed by bisection on the binomial
// tail to absolute tolerance 1e-10. lower: P[true p >= L] >= 1 - level.
double binomial_lower_bound(std::int64_t successes, std::int64_t trials, double level);
double binomial_upper_bound(std::int64_t successes, std::int64_t trials, double level);

// P[Bin(trials, p) >= s]; exposed for the bound tests.
double binomial_upper_tail(std::int64_t trials, std::int64_t s, double p);

// Bonferroni split: each one-sided bound runs at level alpha / (2 * K).
GapVector gaps_from_votes(const VoteStats& stats, const SmoothingParams& params,
                          std::uint64_t seed);

}  // namespace gicert
