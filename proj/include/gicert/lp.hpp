#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gicert {

enum class LpStatus { kOptimal, kInfeasible, kNumericFailure };

// Canonical form: maximize c^T x subject to A x <= b and finite boxes
// lo <= x <= hi. Rows are stored sparse (CSR). Name tags are diagnostics and
// may be left empty on large instances.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower, upper;
  std::vector<std::size_t> row_ptr{0};
  std::vector<int> col_idx;
  std::vector<double> coeffs;
  std::vector<double> rhs;
  std::vector<std::string> var_names;
  std::vector<std::string> row_names;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
  std::size_t num_nonzeros() const { return coeffs.size(); }

  int add_variable(double lo, double hi, double c, std::string name = {});
  void add_row(std::span<const std::pair<int, double>> entries, double b,
               std::string name = {});
  void add_row(std::initializer_list<std::pair<int, double>> entries, double b,
               std::string name = {});
  void validate() const;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumericFailure;
  std::vector<double> x;
  double objective = 0.0;
  // Multipliers for the Ax <= b rows (nonnegative after clamping) and the
  // reduced costs d_j = c_j - (A^T y)_j whose signs select the active bound
  // multipliers. dual_bound is the certified Lagrangian bound: for any y >= 0,
  // U(y) = y^T b + sum_j max over the box of d_j x_j >= c^T x for every
  // feasible x, so the reported bound survives floating-point error.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  double dual_bound = std::numeric_limits<double>::infinity();
  long pivots = 0;
  bool has_farkas = false;
  std::vector<double> farkas;  // row multipliers certifying infeasibility
  std::string message;
};

// Deterministic bounded-variable simplex (Dantzig pricing, Bland's rule on
// ties and under stalling). Iteration cap: 50 * (rows + vars).
LpSolution solve(const LinearProgram& lp, double tol = 1e-9);

// Recomputes the certified bound from scratch with compensated summation,
// clamping multipliers to y >= 0. Throws if the inputs are not finite.
double dual_upper_bound(const LinearProgram& lp, const LpSolution& sol);
double dual_upper_bound(const LinearProgram& lp, std::span<const double> row_duals);

// Injected-node exchangeability: variables and rows that form orbits under a
// permutation group collapse to one representative each. The reduced LP is
// the full LP restricted to the symmetric subspace; for group-symmetric
// programs the optimum is unchanged (averaging an optimum over the group is
// feasible and has equal objective). Collapse consistency is validated row
// by row; boxes and objective must be constant on each variable orbit.
struct OrbitMap {
  std::vector<int> var_orbit;  // per column, ids 0..num_var_orbits-1
  std::vector<int> row_orbit;  // per row, ids 0..num_row_orbits-1
};

struct ReducedLp {
  LinearProgram lp;
  OrbitMap orbits;                         // copy of the labeling
  std::vector<std::int64_t> var_orbit_size;
  std::vector<std::int64_t> row_orbit_size;
};

ReducedLp reduce_by_orbits(const LinearProgram& lp, const OrbitMap& orbits);
std::vector<double> lift_primal(const ReducedLp& red, std::span<const double> x_reduced);
std::vector<double> lift_row_duals(const ReducedLp& red, std::span<const double> y_reduced);

// CPLEX LP-format dump for cross-checking against external solvers.
void write_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace gicert
