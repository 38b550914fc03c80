#include "gicert/votes.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gicert/rng.hpp"
#include "gicert/threading.hpp"

namespace gicert {

void VoteStats::resolve_top2() {
  y_a.assign(n, 0);
  y_b.assign(n, 0);
  n_a.assign(n, 0);
  n_b.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    int a = 0;
    for (int y = 1; y < num_classes; ++y)
      if (count(v, y) > count(v, a)) a = y;
    int b = a == 0 ? 1 : 0;
    for (int y = 0; y < num_classes; ++y) {
      if (y == a || y == b) continue;
      if (count(v, y) > count(v, b)) b = y;
    }
    if (num_classes < 2) b = a;
    y_a[v] = a;
    y_b[v] = b;
    n_a[v] = count(v, a);
    n_b[v] = num_classes < 2 ? 0 : count(v, b);
  }
}

namespace {

void accumulate_range(const Graph& g, const BaseClassifier& model, const SmoothingParams& params,
                      std::int64_t begin, std::int64_t end, std::uint64_t seed,
                      std::vector<std::uint32_t>& counts, int num_classes) {
  for (std::int64_t i = begin; i < end; ++i) {
    const SampledGraph sg = sample(g, params, sample_seed(seed, static_cast<std::uint64_t>(i)));
    const std::vector<int> pred = model.predict_all(sg);
    for (int v = 0; v < g.n; ++v)
      ++counts[static_cast<std::size_t>(v) * num_classes + pred[v]];
  }
}

VoteStats make_stats(const Graph& g, const BaseClassifier& model, std::int64_t samples,
                     double alpha) {
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  VoteStats stats;
  stats.n = g.n;
  stats.num_classes = model.num_classes();
  stats.samples = samples;
  stats.alpha = alpha;
  stats.counts.assign(static_cast<std::size_t>(g.n) * stats.num_classes, 0);
  return stats;
}

}  // namespace

VoteStats estimate_votes_serial(const Graph& g, const BaseClassifier& model,
                                const SmoothingParams& params, std::int64_t samples,
                                std::uint64_t seed, double alpha) {
  VoteStats stats = make_stats(g, model, samples, alpha);
  accumulate_range(g, model, params, 0, samples, seed, stats.counts, stats.num_classes);
  stats.resolve_top2();
  return stats;
}

VoteStats estimate_votes(const Graph& g, const BaseClassifier& model,
                         const SmoothingParams& params, std::int64_t samples,
                         std::uint64_t seed, double alpha, int threads) {
  VoteStats stats = make_stats(g, model, samples, alpha);
  const int workers = resolve_thread_count(threads);
#ifdef _OPENMP
  if (workers > 1) {
    std::vector<std::vector<std::uint32_t>> partial(
        workers, std::vector<std::uint32_t>(stats.counts.size(), 0));
#pragma omp parallel num_threads(workers)
    {
      const int t = omp_get_thread_num();
      const std::int64_t chunk = (samples + workers - 1) / workers;
      const std::int64_t begin = std::min<std::int64_t>(samples, t * chunk);
      const std::int64_t end = std::min<std::int64_t>(samples, begin + chunk);
      accumulate_range(g, model, params, begin, end, seed, partial[t], stats.num_classes);
    }
    for (const auto& part : partial)
      for (std::size_t i = 0; i < stats.counts.size(); ++i) stats.counts[i] += part[i];
    stats.resolve_top2();
    return stats;
  }
#endif
  (void)workers;
  accumulate_range(g, model, params, 0, samples, seed, stats.counts, stats.num_classes);
  stats.resolve_top2();
  return stats;
}

double binomial_upper_tail(std::int64_t trials, std::int64_t s, double p) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (s <= 0) return 1.0;
  if (s > trials) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double n = static_cast<double>(trials);
  const double logp = std::log(p), logq = std::log1p(-p);
  const auto log_term = [&](std::int64_t j) {
    return std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(n - static_cast<double>(j) + 1.0) + static_cast<double>(j) * logp +
           (n - static_cast<double>(j)) * logq;
  };
  const std::int64_t mode = static_cast<std::int64_t>((n + 1.0) * p);
  if (s > mode) {
    // Terms decrease walking up from s.
    double sum = 1.0, term = 1.0;
    for (std::int64_t j = s; j < trials; ++j) {
      term *= (n - static_cast<double>(j)) / (static_cast<double>(j) + 1.0) * (p / (1.0 - p));
      sum += term;
      if (term < sum * 1e-18) break;
    }
    return std::exp(log_term(s)) * sum;
  }
  // Complement of the lower tail; terms decrease walking down from s-1.
  double sum = 1.0, term = 1.0;
  for (std::int64_t j = s - 1; j > 0; --j) {
    term *= (static_cast<double>(j)) / (n - static_cast<double>(j) + 1.0) * ((1.0 - p) / p);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return 1.0 - std::exp(log_term(s - 1)) * sum;
}

double binomial_lower_bound(std::int64_t successes, std::int64_t trials, double level) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw std::invalid_argument("invalid success/trial counts");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  if (successes == 0) return 0.0;
  if (successes == trials) return std::exp(std::log(level) / static_cast<double>(trials));
  // P[Bin(n,p) >= s] increases in p; find the crossing with `level` from below.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_upper_tail(trials, successes, mid) >= level)
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

double binomial_upper_bound(std::int64_t successes, std::int64_t trials, double level) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw std::invalid_argument("invalid success/trial counts");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  if (successes == trials) return 1.0;
  if (successes == 0) return 1.0 - std::exp(std::log(level) / static_cast<double>(trials));
  // P[Bin(n,p) <= s] decreases in p; find the crossing from above.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double le = 1.0 - binomial_upper_tail(trials, successes + 1, mid);
    if (le > level)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

GapVector gaps_from_votes(const VoteStats& stats, const SmoothingParams& params,
                          std::uint64_t seed) {
  GapVector gaps;
  gaps.num_classes = stats.num_classes;
  gaps.samples = stats.samples;
  gaps.alpha = stats.alpha;
  gaps.params = params;
  gaps.seed = seed;
  gaps.generator = kGeneratorId;
  const double level = stats.alpha / (2.0 * stats.num_classes);
  gaps.nodes.resize(stats.n);
  for (int v = 0; v < stats.n; ++v) {
    NodeGap& ng = gaps.nodes[v];
    ng.node = v;
    ng.y_star = stats.y_a[v];
    ng.p_a_lower = binomial_lower_bound(stats.n_a[v], stats.samples, level);
    ng.p_b_upper = stats.num_classes < 2
                       ? 0.0
                       : binomial_upper_bound(stats.n_b[v], stats.samples, level);
    ng.c = ng.p_a_lower - ng.p_b_upper;
  }
  return gaps;
}

}  // namespace gicert
