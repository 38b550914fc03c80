#include "gicert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gicert/rng.hpp"
#include "gicert/threading.hpp"

namespace gicert {

void TinyInstance::validate() const {
  g.validate();
  threat.validate();
  params.validate_for_certification();
  if (g.n > 8 || threat.rho > 3 || threat.tau > 3)
    throw std::invalid_argument("tiny instance exceeds n<=8, rho<=3, tau<=3");
  if (slot_count() > kMaxOracleSlots)
    throw std::invalid_argument("tiny instance exceeds the enumeration slot limit");
  if (targets.size() != gaps.size())
    throw std::invalid_argument("targets and gaps must be aligned");
  for (int v : targets)
    if (v < 0 || v >= g.n) throw std::invalid_argument("target out of range");
}

namespace {

std::vector<std::uint8_t> encode_attack(const AttackVariables& a, int n) {
  std::vector<std::uint8_t> code;
  code.reserve(a.a1.size() + a.a2.size() / 2);
  code.insert(code.end(), a.a1.begin(), a.a1.end());
  for (int i = 0; i < a.rho; ++i)
    for (int j = i + 1; j < a.rho; ++j) code.push_back(a.a2_at(i, j));
  (void)n;
  return code;
}

std::vector<std::uint8_t> encode_permuted(const AttackVariables& a, int n,
                                          const std::vector<int>& perm) {
  std::vector<std::uint8_t> code;
  code.reserve(a.a1.size() + a.a2.size() / 2);
  for (int i = 0; i < a.rho; ++i)
    for (int u = 0; u < n; ++u) code.push_back(a.a1_at(perm[i], u, n));
  for (int i = 0; i < a.rho; ++i)
    for (int j = i + 1; j < a.rho; ++j) code.push_back(a.a2_at(perm[i], perm[j]));
  return code;
}

bool is_canonical(const AttackVariables& a, int n) {
  if (a.rho <= 1) return true;
  const std::vector<std::uint8_t> own = encode_attack(a, n);
  std::vector<int> perm(a.rho);
  std::iota(perm.begin(), perm.end(), 0);
  while (std::next_permutation(perm.begin(), perm.end())) {
    if (encode_permuted(a, n, perm) < own) return false;
  }
  return true;
}

struct AttackGenerator {
  int n, rho, tau;
  AttackVariables attack;
  std::vector<int> residual;
  std::vector<AttackVariables> out;

  AttackGenerator(int n_, int rho_, int tau_) : n(n_), rho(rho_), tau(tau_) {
    attack = AttackVariables::empty(rho, n);
    residual.assign(rho, tau);
  }

  void gen_a1(int i, int u, int budget) {
    if (u == n) {
      residual[i] = budget;
      gen_node(i + 1);
      return;
    }
    gen_a1(i, u + 1, budget);
    if (budget > 0) {
      attack.set_a1(i, u, n, 1);
      gen_a1(i, u + 1, budget - 1);
      attack.set_a1(i, u, n, 0);
    }
  }

  void gen_a2(int i, int j, int budget) {
    if (j == i) {
      gen_a1(i, 0, budget);
      return;
    }
    gen_a2(i, j + 1, budget);
    if (budget > 0 && residual[j] > 0) {
      --residual[j];
      attack.set_a2(i, j, 1);
      gen_a2(i, j + 1, budget - 1);
      attack.set_a2(i, j, 0);
      ++residual[j];
    }
  }

  void gen_node(int i) {
    if (i == rho) {
      if (is_canonical(attack, n)) out.push_back(attack);
      return;
    }
    gen_a2(i, 0, tau);
  }
};

}  // namespace

std::vector<AttackVariables> enumerate_attacks(const Graph& g, const ThreatModel& threat) {
  threat.validate();
  const int slots = threat.rho * g.n + threat.rho * (threat.rho - 1) / 2;
  if (slots > kMaxOracleSlots) throw std::invalid_argument("instance too large to enumerate");
  AttackGenerator gen(g.n, threat.rho, threat.effective_tau(g.n));
  gen.gen_node(0);
  return std::move(gen.out);
}

namespace {

long count_non_robust(const TinyInstance& inst, const AttackVariables& attack,
                      const LogCoefficients& coeffs) {
  const Adjacency composed = build_composed_adjacency(inst.g, attack);
  long m = 0;
  for (std::size_t t = 0; t < inst.targets.size(); ++t) {
    const auto counts = injected_walk_counts(composed, inst.g.n, inst.targets[t], inst.threat.k);
    const double bound = interference_bound_from_counts(coeffs, counts);
    if (!is_certified(bound, inst.gaps[t])) ++m;
  }
  return m;
}

}  // namespace

WorstCase exact_worst_case_serial(const TinyInstance& inst) {
  inst.validate();
  const LogCoefficients coeffs = LogCoefficients::make(inst.params, inst.threat.k);
  const std::vector<AttackVariables> attacks = enumerate_attacks(inst.g, inst.threat);
  WorstCase best;
  best.m_star = -1;
  std::vector<std::uint8_t> best_code;
  for (const AttackVariables& a : attacks) {
    const long m = count_non_robust(inst, a, coeffs);
    if (m > best.m_star) {
      best.m_star = m;
      best.argmax = a;
      best_code = encode_attack(a, inst.g.n);
    } else if (m == best.m_star) {
      std::vector<std::uint8_t> code = encode_attack(a, inst.g.n);
      if (code < best_code) {
        best.argmax = a;
        best_code = std::move(code);
      }
    }
  }
  return best;
}

WorstCase exact_worst_case(const TinyInstance& inst, int threads) {
  inst.validate();
  const LogCoefficients coeffs = LogCoefficients::make(inst.params, inst.threat.k);
  const std::vector<AttackVariables> attacks = enumerate_attacks(inst.g, inst.threat);
  const int workers = resolve_thread_count(threads);
#ifdef _OPENMP
  if (workers > 1 && attacks.size() > 64) {
    std::vector<WorstCase> local(workers);
    std::vector<std::vector<std::uint8_t>> local_code(workers);
    for (auto& wc : local) wc.m_star = -1;
#pragma omp parallel num_threads(workers)
    {
      const int t = omp_get_thread_num();
      WorstCase& wc = local[t];
#pragma omp for schedule(static)
      for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(attacks.size()); ++idx) {
        const long m = count_non_robust(inst, attacks[idx], coeffs);
        if (m > wc.m_star) {
          wc.m_star = m;
          wc.argmax = attacks[idx];
          local_code[t] = encode_attack(attacks[idx], inst.g.n);
        } else if (m == wc.m_star) {
          std::vector<std::uint8_t> code = encode_attack(attacks[idx], inst.g.n);
          if (code < local_code[t]) {
            wc.argmax = attacks[idx];
            local_code[t] = std::move(code);
          }
        }
      }
    }
    WorstCase best;
    best.m_star = -1;
    std::vector<std::uint8_t> best_code;
    for (int t = 0; t < workers; ++t) {
      if (local[t].m_star < 0) continue;
      if (local[t].m_star > best.m_star ||
          (local[t].m_star == best.m_star && local_code[t] < best_code)) {
        best = local[t];
        best_code = local_code[t];
      }
    }
    return best;
  }
#endif
  (void)workers;
  return exact_worst_case_serial(inst);
}

// ---------------------------------------------------------------------------
// Exact and empirical event probabilities.
// ---------------------------------------------------------------------------

namespace {

struct ComposedView {
  int n_existing = 0;
  int total = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> off;
  std::vector<std::pair<int, int>> adj;  // (neighbor, edge id)
};

ComposedView make_composed_view(const Graph& g, const AttackVariables& attack) {
  ComposedView view;
  view.n_existing = g.n;
  view.total = g.n + attack.rho;
  view.edges = g.edges;
  for (int i = 0; i < attack.rho; ++i)
    for (int u = 0; u < g.n; ++u)
      if (attack.a1_at(i, u, g.n)) view.edges.emplace_back(u, g.n + i);
  for (int i = 0; i < attack.rho; ++i)
    for (int j = i + 1; j < attack.rho; ++j)
      if (attack.a2_at(i, j)) view.edges.emplace_back(g.n + i, g.n + j);

  view.off.assign(view.total + 1, 0);
  for (const auto& [u, w] : view.edges) {
    ++view.off[u + 1];
    ++view.off[w + 1];
  }
  for (int i = 0; i < view.total; ++i) view.off[i + 1] += view.off[i];
  view.adj.resize(2 * view.edges.size());
  std::vector<int> cursor(view.off.begin(), view.off.end() - 1);
  for (std::size_t e = 0; e < view.edges.size(); ++e) {
    const auto& [u, w] = view.edges[e];
    view.adj[cursor[u]++] = {w, static_cast<int>(e)};
    view.adj[cursor[w]++] = {u, static_cast<int>(e)};
  }
  return view;
}

// At least one injected node reaches v within k live hops. The target's own
// deletion bit is exempt (one node per edge in the survival accounting).
bool event_occurs(const ComposedView& view, const std::uint8_t* node_kept,
                  const std::uint8_t* edge_kept, int v, int k) {
  const auto alive = [&](int x) { return x == v || node_kept[x]; };
  std::vector<int> dist(view.total, -1);
  std::vector<int> frontier;
  for (int i = view.n_existing; i < view.total; ++i)
    if (node_kept[i]) {
      dist[i] = 0;
      frontier.push_back(i);
    }
  for (int d = 0; d < k && !frontier.empty(); ++d) {
    std::vector<int> next;
    for (int u : frontier)
      for (int e = view.off[u]; e < view.off[u + 1]; ++e) {
        const auto& [w, id] = view.adj[e];
        if (!edge_kept[id] || !alive(w) || dist[w] >= 0) continue;
        if (w == v) return true;
        dist[w] = d + 1;
        next.push_back(w);
      }
    frontier.swap(next);
  }
  return false;
}

}  // namespace

double exact_event_probability_masks(const Graph& g, const AttackVariables& attack,
                                     const SmoothingParams& params, int v, int k) {
  params.validate_for_certification();
  const ComposedView view = make_composed_view(g, attack);
  const int num_edges = static_cast<int>(view.edges.size());
  const int num_nodes = view.total - 1;  // v's bit is marginalized out
  const int bits = num_edges + num_nodes;
  if (bits > 22) throw std::invalid_argument("mask enumeration limited to 22 bits");

  std::vector<int> node_of_bit;
  for (int x = 0; x < view.total; ++x)
    if (x != v) node_of_bit.push_back(x);

  std::vector<std::uint8_t> edge_kept(num_edges), node_kept(view.total);
  node_kept[v] = 1;
  double total = 0.0;
  const double ke = params.keep_e(), kn = params.keep_n();
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << bits); ++mask) {
    double prob = 1.0;
    for (int b = 0; b < num_edges; ++b) {
      const bool kept = mask & (std::uint64_t(1) << b);
      edge_kept[b] = kept;
      prob *= kept ? ke : 1.0 - ke;
    }
    for (int b = 0; b < num_nodes; ++b) {
      const bool kept = mask & (std::uint64_t(1) << (num_edges + b));
      node_kept[node_of_bit[b]] = kept;
      prob *= kept ? kn : 1.0 - kn;
    }
    if (prob == 0.0) continue;
    if (event_occurs(view, node_kept.data(), edge_kept.data(), v, k)) total += prob;
  }
  return total;
}

double exact_event_probability_paths(const Graph& g, const AttackVariables& attack,
                                     const SmoothingParams& params, int v, int k) {
  params.validate_for_certification();
  const ComposedView view = make_composed_view(g, attack);
  if (view.edges.size() > 60 || view.total > 60)
    throw std::invalid_argument("path enumeration limited to 60 edges/nodes");

  // Simple paths from any injected node to v with length <= k; each path is a
  // pair of bit masks (edges, non-v nodes).
  struct PathBits {
    std::uint64_t edges = 0;
    std::uint64_t nodes = 0;
  };
  std::vector<PathBits> paths;
  std::vector<std::uint8_t> visited(view.total, 0);
  PathBits current;

  const auto dfs = [&](auto&& self, int u, int depth) -> void {
    for (int e = view.off[u]; e < view.off[u + 1]; ++e) {
      const auto& [w, id] = view.adj[e];
      if (w == v) {
        paths.push_back({current.edges | (std::uint64_t(1) << id), current.nodes});
        continue;
      }
      if (depth == k - 1 || visited[w]) continue;
      visited[w] = 1;
      current.edges |= std::uint64_t(1) << id;
      current.nodes |= std::uint64_t(1) << w;
      self(self, w, depth + 1);
      current.nodes &= ~(std::uint64_t(1) << w);
      current.edges &= ~(std::uint64_t(1) << id);
      visited[w] = 0;
    }
  };
  for (int s = view.n_existing; s < view.total; ++s) {
    std::fill(visited.begin(), visited.end(), 0);
    visited[s] = 1;
    current = {};
    current.nodes = std::uint64_t(1) << s;
    dfs(dfs, s, 0);
  }
  if (paths.size() > 20)
    throw std::invalid_argument("inclusion-exclusion limited to 20 paths");
  if (paths.empty()) return 0.0;

  const double ke = params.keep_e(), kn = params.keep_n();
  double total = 0.0;
  const std::uint32_t subsets = 1u << paths.size();
  for (std::uint32_t s = 1; s < subsets; ++s) {
    std::uint64_t eu = 0, nu = 0;
    for (std::size_t q = 0; q < paths.size(); ++q)
      if (s & (1u << q)) {
        eu |= paths[q].edges;
        nu |= paths[q].nodes;
      }
    const double prob = std::pow(ke, __builtin_popcountll(eu)) *
                        std::pow(kn, __builtin_popcountll(nu));
    total += (__builtin_popcount(s) % 2 == 1) ? prob : -prob;
  }
  return total;
}

double exact_event_probability(const Graph& g, const AttackVariables& attack,
                               const SmoothingParams& params, int v, int k) {
  const ComposedView view = make_composed_view(g, attack);
  const int bits = static_cast<int>(view.edges.size()) + view.total - 1;
  if (bits <= 20) return exact_event_probability_masks(g, attack, params, v, k);
  return exact_event_probability_paths(g, attack, params, v, k);
}

namespace {

std::int64_t count_event_occurrences(const Graph& composed, const ComposedView& view,
                                     const SmoothingParams& params, int v, int k,
                                     std::int64_t begin, std::int64_t end, std::uint64_t seed) {
  std::int64_t hits = 0;
  for (std::int64_t i = begin; i < end; ++i) {
    const SampledGraph sg = sample(composed, params, sample_seed(seed, i));
    if (event_occurs(view, sg.node_kept.data(), sg.edge_kept.data(), v, k)) ++hits;
  }
  return hits;
}

}  // namespace

double empirical_event_frequency_serial(const Graph& g, const AttackVariables& attack,
                                        const SmoothingParams& params, int v, int k,
                                        std::int64_t samples, std::uint64_t seed) {
  const ComposedView view = make_composed_view(g, attack);
  Graph composed;
  composed.n = view.total;
  composed.edges = view.edges;
  const std::int64_t hits =
      count_event_occurrences(composed, view, params, v, k, 0, samples, seed);
  return static_cast<double>(hits) / static_cast<double>(samples);
}

double empirical_event_frequency(const Graph& g, const AttackVariables& attack,
                                 const SmoothingParams& params, int v, int k,
                                 std::int64_t samples, std::uint64_t seed, int threads) {
  const int workers = resolve_thread_count(threads);
#ifdef _OPENMP
  if (workers > 1 && samples >= 1024) {
    const ComposedView view = make_composed_view(g, attack);
    Graph composed;
    composed.n = view.total;
    composed.edges = view.edges;
    std::int64_t hits = 0;
#pragma omp parallel num_threads(workers) reduction(+ : hits)
    {
      const int t = omp_get_thread_num();
      const std::int64_t chunk = (samples + workers - 1) / workers;
      const std::int64_t begin = std::min<std::int64_t>(samples, t * chunk);
      const std::int64_t end = std::min<std::int64_t>(samples, begin + chunk);
      hits += count_event_occurrences(composed, view, params, v, k, begin, end, seed);
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
  }
#endif
  (void)workers;
  return empirical_event_frequency_serial(g, attack, params, v, k, samples, seed);
}

// ---------------------------------------------------------------------------
// Battery and selftest.
// ---------------------------------------------------------------------------

TinyInstance make_battery_instance(std::uint64_t seed, int index) {
  const std::uint64_t base =
      hash_combine(hash_combine(seed, stream::kUser), static_cast<std::uint64_t>(index));
  std::uint64_t counter = 0;
  const auto draw = [&]() { return u01(hash_combine(base, ++counter)); };

  TinyInstance inst;
  inst.g.n = 3 + static_cast<int>(draw() * 6.0);  // 3..8
  inst.threat.tau = 1 + static_cast<int>(draw() * 3.0);
  inst.threat.rho = static_cast<int>(draw() * 4.0);
  inst.threat.k = 2;
  while (inst.slot_count() > 20) --inst.threat.rho;

  for (int u = 0; u < inst.g.n; ++u)
    for (int w = u + 1; w < inst.g.n; ++w)
      if (draw() < 0.35) inst.g.edges.emplace_back(u, w);

  inst.params.p_e = 0.5 + 0.4 * draw();
  inst.params.p_n = 0.5 + 0.4 * draw();

  std::vector<int> ids(inst.g.n);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = inst.g.n - 1; i > 0; --i)
    std::swap(ids[i], ids[static_cast<int>(draw() * (i + 1))]);
  const int nt = 1 + static_cast<int>(draw() * std::min(4, inst.g.n));
  inst.targets.assign(ids.begin(), ids.begin() + nt);
  for (int t = 0; t < nt; ++t) inst.gaps.push_back(-0.1 + 1.1 * draw());
  return inst;
}

CertProblem battery_problem(const TinyInstance& inst, CertMethod method) {
  GapVector gaps;
  gaps.params = inst.params;
  gaps.num_classes = 2;
  gaps.samples = 1;
  gaps.generator = kGeneratorId;
  gaps.nodes.resize(inst.g.n);
  for (int v = 0; v < inst.g.n; ++v) {
    gaps.nodes[v].node = v;
    gaps.nodes[v].c = -1.0;
  }
  for (std::size_t t = 0; t < inst.targets.size(); ++t)
    gaps.nodes[inst.targets[t]].c = inst.gaps[t];
  return make_problem(inst.g, gaps, inst.targets, inst.threat, method);
}

SelftestResult run_selftest(const SelftestConfig& config) {
  SelftestResult result;
  const double fault = config.inject_fault ? -0.05 : 1e-12;
  for (int idx = 0; idx < config.instances; ++idx) {
    const TinyInstance inst = make_battery_instance(config.seed, idx);
    ++result.instances;
    const std::string tag = "instance " + std::to_string(idx);

    const WorstCase oracle = exact_worst_case(inst, config.threads);
    ++result.checks;
    if (idx % 8 == 0) {
      const WorstCase serial = exact_worst_case_serial(inst);
      ++result.checks;
      if (serial.m_star != oracle.m_star)
        result.violations.push_back(tag + ": parallel and serial worst case disagree");
    }

    const CertProblem pb = battery_problem(inst, CertMethod::kExact);
    const ExactResult exact = exact_optimum(pb);
    ++result.checks;
    if (exact.m_star + pb.abstain_count != oracle.m_star)
      result.violations.push_back(tag + ": solve_exact disagrees with the oracle (" +
                                  std::to_string(exact.m_star + pb.abstain_count) + " vs " +
                                  std::to_string(oracle.m_star) + ")");

    for (CertMethod method : {CertMethod::kLp1, CertMethod::kLp2}) {
      CertProblem lp_pb = battery_problem(inst, method);
      const CertificateReport rep = certify_collective(lp_pb);
      ++result.checks;
      if (rep.status != "ok") {
        result.violations.push_back(tag + ": " + std::string(method_name(method)) + " " +
                                    rep.status);
        continue;
      }
      if (std::floor(rep.m_upper + 1e-9) < static_cast<double>(oracle.m_star))
        result.violations.push_back(tag + ": " + std::string(method_name(method)) +
                                    " bound fell below the exact optimum");
    }

    // Bound direction on a deterministic attack sample.
    const std::vector<AttackVariables> attacks = enumerate_attacks(inst.g, inst.threat);
    const std::size_t step = std::max<std::size_t>(1, attacks.size() / 8);
    for (std::size_t a = 0; a < attacks.size(); a += step) {
      const ComposedView probe = make_composed_view(inst.g, attacks[a]);
      const int bits = static_cast<int>(probe.edges.size()) + probe.total - 1;
      if (bits > 18) continue;
      for (std::size_t t = 0; t < inst.targets.size(); ++t) {
        const int v = inst.targets[t];
        const double exact_p =
            exact_event_probability_masks(inst.g, attacks[a], inst.params, v, inst.threat.k);
        const double bound = interference_bound(inst.g, attacks[a], inst.params, v,
                                                inst.threat.k);
        ++result.checks;
        if (exact_p > bound + fault)
          result.violations.push_back(tag + ": exact event probability exceeds the bound");
        double via_paths = -1.0;
        try {
          via_paths = exact_event_probability_paths(inst.g, attacks[a], inst.params, v,
                                                    inst.threat.k);
        } catch (const std::invalid_argument&) {
          via_paths = -1.0;  // too many paths; skip the cross-check
        }
        if (via_paths >= 0.0) {
          ++result.checks;
          if (std::abs(via_paths - exact_p) > 1e-12)
            result.violations.push_back(tag + ": mask and path enumerations disagree");
        }
      }
    }
  }
  return result;
}

}  // namespace gicert
