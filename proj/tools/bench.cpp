// Benchmark of the OpenMP kernels against their serial reference
// implementations. Results must match bit for bit; timings are informative.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "gicert/classifier.hpp"
#include "gicert/oracle.hpp"
#include "gicert/rng.hpp"
#include "gicert/threading.hpp"
#include "gicert/votes.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

gicert::Graph random_graph(int n, int extra_edges, std::uint64_t seed) {
  gicert::Graph g;
  g.n = n;
  for (int v = 1; v < n; ++v) g.add_edge(v - 1, v);  // keep it connected
  std::uint64_t counter = 0;
  while (extra_edges > 0) {
    const int u = static_cast<int>(gicert::u01(gicert::hash_combine(seed, ++counter)) * n);
    const int w = static_cast<int>(gicert::u01(gicert::hash_combine(seed, ++counter)) * n);
    if (u == w) continue;
    const auto e = std::minmax(u, w);
    bool dup = false;
    for (const auto& existing : g.edges)
      if (existing == std::make_pair(e.first, e.second)) {
        dup = true;
        break;
      }
    if (dup) continue;
    g.add_edge(e.first, e.second);
    --extra_edges;
  }
  return g;
}

}  // namespace

int main() {
  const int threads = gicert::resolve_thread_count(0);
  std::printf("gicert kernel benchmark (workers: %d)\n", threads);
  std::printf("%-28s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

  int failures = 0;

  {
    const gicert::Graph g = random_graph(400, 800, 11);
    const gicert::SyntheticClassifier model(5, 2);
    const gicert::SmoothingParams params{0.8, 0.7};
    const std::int64_t n_samples = 1500;
    auto t0 = Clock::now();
    const gicert::VoteStats serial =
        gicert::estimate_votes_serial(g, model, params, n_samples, 42);
    const double ms_serial = time_ms(t0);
    t0 = Clock::now();
    const gicert::VoteStats parallel =
        gicert::estimate_votes(g, model, params, n_samples, 42, 0.01, threads);
    const double ms_parallel = time_ms(t0);
    if (serial.counts != parallel.counts) {
      std::printf("vote estimation: MISMATCH between serial and parallel counts\n");
      ++failures;
    }
    std::printf("%-28s %12.1f %12.1f %7.2fx\n", "vote estimation", ms_serial, ms_parallel,
                ms_serial / ms_parallel);
  }

  {
    gicert::TinyInstance inst = gicert::make_battery_instance(2024, 3);
    inst.threat.rho = 3;
    inst.threat.tau = 3;
    while (inst.slot_count() > gicert::kMaxOracleSlots) --inst.threat.rho;
    auto t0 = Clock::now();
    const gicert::WorstCase serial = gicert::exact_worst_case_serial(inst);
    const double ms_serial = time_ms(t0);
    t0 = Clock::now();
    const gicert::WorstCase parallel = gicert::exact_worst_case(inst, threads);
    const double ms_parallel = time_ms(t0);
    if (serial.m_star != parallel.m_star ||
        serial.argmax.a1 != parallel.argmax.a1 || serial.argmax.a2 != parallel.argmax.a2) {
      std::printf("oracle worst case: MISMATCH between serial and parallel results\n");
      ++failures;
    }
    std::printf("%-28s %12.1f %12.1f %7.2fx\n", "oracle worst case", ms_serial, ms_parallel,
                ms_serial / ms_parallel);
  }

  {
    gicert::Graph g = random_graph(12, 8, 5);
    gicert::AttackVariables attack = gicert::AttackVariables::empty(2, g.n);
    attack.set_a1(0, 0, g.n, 1);
    attack.set_a1(1, 3, g.n, 1);
    attack.set_a2(0, 1, 1);
    const gicert::SmoothingParams params{0.8, 0.7};
    const std::int64_t n_samples = 400000;
    auto t0 = Clock::now();
    const double serial =
        gicert::empirical_event_frequency_serial(g, attack, params, 5, 2, n_samples, 9);
    const double ms_serial = time_ms(t0);
    t0 = Clock::now();
    const double parallel =
        gicert::empirical_event_frequency(g, attack, params, 5, 2, n_samples, 9, threads);
    const double ms_parallel = time_ms(t0);
    if (serial != parallel) {
      std::printf("event frequency: MISMATCH between serial and parallel results\n");
      ++failures;
    }
    std::printf("%-28s %12.1f %12.1f %7.2fx\n", "event frequency", ms_serial, ms_parallel,
                ms_serial / ms_parallel);
  }

  if (failures > 0) {
    std::printf("%d kernel(s) disagreed with the serial reference\n", failures);
    return 1;
  }
  return 0;
}
