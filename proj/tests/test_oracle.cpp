#include <cmath>

#include "doctest.h"
#include "gicert/oracle.hpp"
#include "gicert/rng.hpp"

using namespace gicert;

namespace {

Graph path_graph(int n) {
  Graph g;
  g.n = n;
  for (int v = 1; v < n; ++v) g.add_edge(v - 1, v);
  return g;
}

}  // namespace

TEST_CASE("attack enumeration counts on hand-solved cases") {
  // rho=1, tau=1, n=3: empty plus three single edges.
  CHECK(enumerate_attacks(path_graph(3), ThreatModel{1, 1, 2}).size() == 4);
  // rho=0: only the empty attack.
  CHECK(enumerate_attacks(path_graph(3), ThreatModel{0, 2, 2}).size() == 1);
  // rho=2, tau=1, n=2, up to swapping the injected pair:
  // empty; one node wired to 0 or 1; both wired {0,0},{0,1},{1,1}; internal edge.
  CHECK(enumerate_attacks(path_graph(2), ThreatModel{2, 1, 2}).size() == 7);
}

TEST_CASE("every enumerated attack is valid and canonical") {
  Graph g = path_graph(4);
  const ThreatModel threat{2, 2, 2};
  const auto attacks = enumerate_attacks(g, threat);
  for (const AttackVariables& a : attacks) CHECK_NOTHROW(a.validate(g, threat));
  // Swapping injected labels of an asymmetric attack must not appear twice.
  int with_mixed_rows = 0;
  for (const AttackVariables& a : attacks) {
    if (a.injected_degree(0, g.n) != a.injected_degree(1, g.n)) ++with_mixed_rows;
  }
  CHECK(with_mixed_rows > 0);
}

TEST_CASE("worst case with no budget counts only abstains") {
  TinyInstance inst;
  inst.g = path_graph(4);
  inst.threat = ThreatModel{0, 2, 2};
  inst.params = SmoothingParams{0.7, 0.7};
  inst.targets = {0, 2, 3};
  inst.gaps = {0.5, -0.1, 0.0};
  const WorstCase wc = exact_worst_case(inst);
  CHECK(wc.m_star == 2);
}

TEST_CASE("growing the budget never shrinks the worst case") {
  TinyInstance inst = make_battery_instance(0xbead, 4);
  long prev = -1;
  for (int rho = 0; rho <= 3; ++rho) {
    inst.threat.rho = rho;
    if (inst.slot_count() > kMaxOracleSlots) break;
    const WorstCase wc = exact_worst_case(inst);
    CHECK(wc.m_star >= prev);
    prev = wc.m_star;
  }
}

TEST_CASE("parallel and serial worst-case scans agree") {
  for (int idx : {0, 3, 9}) {
    const TinyInstance inst = make_battery_instance(0xdead, idx);
    const WorstCase serial = exact_worst_case_serial(inst);
    const WorstCase parallel = exact_worst_case(inst, 2);
    CHECK(serial.m_star == parallel.m_star);
    CHECK(serial.argmax.a1 == parallel.argmax.a1);
    CHECK(serial.argmax.a2 == parallel.argmax.a2);
  }
}

TEST_CASE("single direct edge: exact probability equals the bound") {
  Graph g = path_graph(2);
  AttackVariables a = AttackVariables::empty(1, g.n);
  a.set_a1(0, 0, g.n, 1);
  const SmoothingParams params{0.9, 0.8};
  const double exact = exact_event_probability(g, a, params, 0, 2);
  const double keep = 0.1 * 0.2;
  CHECK(exact == doctest::Approx(keep).epsilon(1e-12));
  // A single path makes the independence assumption exact.
  // (The neighbor node 1 contributes no path to 0 here.)
  CHECK(exact == doctest::Approx(interference_bound(g, a, params, 0, 2)).epsilon(1e-12));
}

TEST_CASE("node-disjoint paths factorize exactly") {
  // Injected 0 -> v directly; injected 1 -> u -> v.
  Graph g;
  g.n = 2;
  g.add_edge(0, 1);
  AttackVariables a = AttackVariables::empty(2, g.n);
  a.set_a1(0, 0, g.n, 1);
  a.set_a1(1, 1, g.n, 1);
  const SmoothingParams params{0.8, 0.7};
  const double q = params.keep_e() * params.keep_n();
  const double expected = 1.0 - (1.0 - q) * (1.0 - q * q);
  const double exact = exact_event_probability(g, a, params, 0, 2);
  CHECK(exact == doctest::Approx(expected).epsilon(1e-12));
  CHECK(exact ==
        doctest::Approx(interference_bound(g, a, params, 0, 2)).epsilon(1e-12));
}

TEST_CASE("paths sharing an edge make the bound strictly conservative") {
  // Both injected nodes route through the same bridge edge u-v.
  Graph g;
  g.n = 2;
  g.add_edge(0, 1);
  AttackVariables a = AttackVariables::empty(2, g.n);
  a.set_a1(0, 1, g.n, 1);
  a.set_a1(1, 1, g.n, 1);
  const SmoothingParams params{0.6, 0.5};
  const double exact = exact_event_probability(g, a, params, 0, 2);
  const double bound = interference_bound(g, a, params, 0, 2);
  CHECK(exact < bound - 1e-9);
}

TEST_CASE("mask and path enumerations agree") {
  for (int idx : {1, 2, 6, 8}) {
    const TinyInstance inst = make_battery_instance(0xfeed, idx);
    if (inst.threat.rho == 0) continue;
    const auto attacks = enumerate_attacks(inst.g, inst.threat);
    const AttackVariables& a = attacks[attacks.size() / 2];
    for (int v : inst.targets) {
      double by_masks = -1.0, by_paths = -1.0;
      try {
        by_masks = exact_event_probability_masks(inst.g, a, inst.params, v, 2);
        by_paths = exact_event_probability_paths(inst.g, a, inst.params, v, 2);
      } catch (const std::invalid_argument&) {
        continue;  // outside one of the enumeration gates
      }
      CHECK(by_masks == doctest::Approx(by_paths).epsilon(1e-12));
    }
  }
}

TEST_CASE("empirical event frequency approaches the exact probability") {
  Graph g = path_graph(3);
  AttackVariables a = AttackVariables::empty(1, g.n);
  a.set_a1(0, 1, g.n, 1);
  const SmoothingParams params{0.7, 0.6};
  const double exact = exact_event_probability(g, a, params, 0, 2);
  const std::int64_t n = 50000;
  const double serial = empirical_event_frequency_serial(g, a, params, 0, 2, n, 5);
  const double parallel = empirical_event_frequency(g, a, params, 0, 2, n, 5, 2);
  CHECK(serial == parallel);
  const double sigma = std::sqrt(exact * (1 - exact) / n);
  CHECK(std::abs(serial - exact) <= 4 * sigma);
}

TEST_CASE("battery instances are deterministic and within limits") {
  for (int idx = 0; idx < 50; ++idx) {
    const TinyInstance a = make_battery_instance(123, idx);
    const TinyInstance b = make_battery_instance(123, idx);
    CHECK(a.g.edges == b.g.edges);
    CHECK(a.targets == b.targets);
    CHECK(a.gaps == b.gaps);
    CHECK_NOTHROW(a.validate());
    CHECK(a.slot_count() <= 20);
  }
}

TEST_CASE("selftest battery passes clean and catches injected faults") {
  SelftestConfig config;
  config.instances = 8;
  const SelftestResult clean = run_selftest(config);
  CHECK(clean.ok());
  CHECK(clean.instances == 8);

  config.inject_fault = true;
  const SelftestResult faulty = run_selftest(config);
  CHECK_FALSE(faulty.ok());
}
