#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gicert/graph.hpp"
#include "gicert/lp.hpp"
#include "gicert/smoothing.hpp"
#include "gicert/votes.hpp"

namespace gicert {

// p_i = 1 - (keep_e * keep_n)^i for i = 1..k and their logarithms. A path of
// length i survives smoothing with probability (keep_e * keep_n)^i, so p_i is
// the probability that it is intercepted.
struct LogCoefficients {
  std::vector<double> p;
  std::vector<double> log_p;

  static LogCoefficients make(const SmoothingParams& params, int k);
};

enum class CertMethod { kExact, kLp1, kLp2, kSamplewise };

const char* method_name(CertMethod m);

// A collective certification instance. Targets with nonpositive gap abstain:
// their constraint is satisfiable at zero attacker cost, so they are excised
// from the optimization and pre-counted as non-robust.
struct CertProblem {
  const Graph* g = nullptr;
  ThreatModel threat;
  SmoothingParams params;
  CertMethod method = CertMethod::kLp2;
  std::vector<int> targets;        // requested target ids, order preserved
  std::vector<int> eff_targets;    // targets with c_v > 0
  std::vector<double> eff_gap;     // c_v per effective target
  std::vector<double> eff_logc;    // C_v = log(1 - c_v/2), negative
  int abstain_count = 0;
  LogCoefficients coeffs;          // k entries
};

CertProblem make_problem(const Graph& g, const GapVector& gaps, std::vector<int> targets,
                         const ThreatModel& threat, CertMethod method);

// Upper bound on the interference-event probability p(E_v) for a concrete
// attack: 1 - prod_i p_i^{count_i} over the walk counts to v.
double interference_bound(const Graph& g, const AttackVariables& attack,
                          const SmoothingParams& params, int v, int k);
double interference_bound_from_counts(const LogCoefficients& coeffs,
                                      std::span<const std::uint64_t> counts);

// Certifying condition: the prediction at v is provably stable iff the
// event-probability bound stays strictly below c_v / 2.
bool is_certified(double p_ev_bound, double c_v);

// Symbolic form of the exact k=2 binary program: variables A1 (rho x n), A2
// (rho x rho symmetric, zero diagonal) and m over the effective targets;
// nodes outside T are fixed to m = 0.
struct BqclpModel {
  const Graph* g = nullptr;
  int rho = 0;
  int tau_eff = 0;
  double ptilde1 = 0.0;
  double ptilde2 = 0.0;
  std::vector<int> targets;
  std::vector<double> logc;
  int abstain_count = 0;
};

BqclpModel build_bqclp(const CertProblem& problem);

struct LpBuild {
  LinearProgram lp;
  OrbitMap orbits;
  int m_col_begin = 0;  // first m-variable column
};

// Product linearization with a Q_v block per effective target (pair
// variables shared for A2 symmetry, diagonals omitted as structural zeros).
LpBuild build_lp1(const CertProblem& problem, bool with_names = false);
// z-substitution relaxation: z = A2^T 1 with box [0, min(tau_eff, rho-1)],
// Q rows emitted only for effective targets.
LpBuild build_lp2(const CertProblem& problem, bool with_names = false);

struct LpDiag {
  long rows = 0;
  long cols = 0;
  long pivots = 0;
  double duality_gap = 0.0;
};

struct CertificateReport {
  std::string status = "ok";
  CertMethod method = CertMethod::kLp2;
  ThreatModel threat;
  SmoothingParams params;
  int n_targets = 0;
  int abstain_count = 0;
  double m_upper = 0.0;
  int certified_count = 0;
  double certified_ratio = 1.0;
  std::vector<int> target_ids;
  std::vector<std::uint8_t> robust_flag;  // diagnostics, aligned with target_ids
  LpDiag lp;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  std::string generator;
};

struct ExactLimits {
  int max_rho = 12;
  long max_n_rho = 200;
};

struct ExactResult {
  long m_star = 0;  // over effective targets only
  AttackVariables argmax;
};

// Depth-first exact optimum with budget pruning and injected-node
// exchangeability (nondecreasing row signatures).
ExactResult exact_optimum(const CertProblem& problem, const ExactLimits& limits = {});
CertificateReport solve_exact(const CertProblem& problem, const ExactLimits& limits = {});

struct CollectiveOptions {
  // Full LPs above this row count are solved through the exchangeability
  // reduction; the certified bound is always validated on the full LP.
  long reduction_row_threshold = 4000;
  bool force_full = false;
  bool force_reduction = false;
  bool with_names = false;
  ExactLimits exact_limits;
  std::string lp_dump_path;  // optional LP-format dump of the full instance
};

CertificateReport certify_collective(const CertProblem& problem,
                                     const CollectiveOptions& opts = {});

// Exact single-target certificate: maximizes n1*|ptilde1| + n2*|ptilde2| over
// canonical budget allocations (direct edges, internal edges among the
// direct-attached nodes, edges to existing neighbors of v, spillover edges
// between the two groups); polynomial in rho and tau.
double samplewise_worst_objective(const Graph& g, const ThreatModel& threat,
                                  const LogCoefficients& coeffs, int v);
bool certify_samplewise(const Graph& g, double c_v, const ThreatModel& threat,
                        const SmoothingParams& params, int v);

int certified_count_from_bound(int n_targets, double m_upper);

}  // namespace gicert
