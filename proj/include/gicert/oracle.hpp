#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gicert/certify.hpp"
#include "gicert/graph.hpp"
#include "gicert/smoothing.hpp"

namespace gicert {

// Enumeration limits: slots = rho*n + rho*(rho-1)/2 candidate edge positions.
inline constexpr int kMaxOracleSlots = 22;

struct TinyInstance {
  Graph g;
  ThreatModel threat;
  SmoothingParams params;
  std::vector<int> targets;
  std::vector<double> gaps;  // c_v aligned with targets

  int slot_count() const {
    return threat.rho * g.n + threat.rho * (threat.rho - 1) / 2;
  }
  void validate() const;
};

// Every (A1, A2) satisfying the degree constraints, deduplicated up to
// injected-node permutation; deterministic order.
std::vector<AttackVariables> enumerate_attacks(const Graph& g, const ThreatModel& threat);

struct WorstCase {
  long m_star = 0;              // includes abstaining targets
  AttackVariables argmax;
};

// Exhaustive maximization of the non-robust target count via
// interference_bound; ties return the lexicographically smallest attack.
WorstCase exact_worst_case(const TinyInstance& inst, int threads = 0);
WorstCase exact_worst_case_serial(const TinyInstance& inst);

// Exact p(E_v): probability that some injected-to-v path of length <= k has
// all edges and all non-v nodes kept. Mask enumeration up to 2^20 bits,
// inclusion-exclusion over simple paths beyond that.
double exact_event_probability(const Graph& g, const AttackVariables& attack,
                               const SmoothingParams& params, int v, int k);
double exact_event_probability_masks(const Graph& g, const AttackVariables& attack,
                                     const SmoothingParams& params, int v, int k);
double exact_event_probability_paths(const Graph& g, const AttackVariables& attack,
                                     const SmoothingParams& params, int v, int k);

// Observed frequency of the interference event over Monte Carlo smoothing
// draws of the attacked graph.
double empirical_event_frequency(const Graph& g, const AttackVariables& attack,
                                 const SmoothingParams& params, int v, int k,
                                 std::int64_t samples, std::uint64_t seed, int threads = 0);
double empirical_event_frequency_serial(const Graph& g, const AttackVariables& attack,
                                        const SmoothingParams& params, int v, int k,
                                        std::int64_t samples, std::uint64_t seed);

// Seeded battery used by the selftest and the acceptance suite.
TinyInstance make_battery_instance(std::uint64_t seed, int index);
CertProblem battery_problem(const TinyInstance& inst, CertMethod method);

struct SelftestConfig {
  int instances = 60;
  std::uint64_t seed = 0x67696365727431ull;
  bool inject_fault = false;  // debug hook: skews the bound to prove the
                              // harness catches violations
  int threads = 0;
};

struct SelftestResult {
  int instances = 0;
  int checks = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

SelftestResult run_selftest(const SelftestConfig& config);

}  // namespace gicert
