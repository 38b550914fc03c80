#include "gicert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gicert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double total() const { return sum + comp; }
};

}  // namespace

int LinearProgram::add_variable(double lo, double hi, double c, std::string name) {
  objective.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  if (!name.empty() || !var_names.empty()) {
    var_names.resize(objective.size() - 1);
    var_names.push_back(std::move(name));
  }
  return num_vars() - 1;
}

void LinearProgram::add_row(std::span<const std::pair<int, double>> entries, double b,
                            std::string name) {
  for (const auto& [j, a] : entries) {
    col_idx.push_back(j);
    coeffs.push_back(a);
  }
  row_ptr.push_back(col_idx.size());
  rhs.push_back(b);
  if (!name.empty() || !row_names.empty()) {
    row_names.resize(rhs.size() - 1);
    row_names.push_back(std::move(name));
  }
}

void LinearProgram::add_row(std::initializer_list<std::pair<int, double>> entries, double b,
                            std::string name) {
  add_row(std::span<const std::pair<int, double>>(entries.begin(), entries.size()), b,
          std::move(name));
}

void LinearProgram::validate() const {
  const int m = num_vars();
  for (int j = 0; j < m; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw std::invalid_argument("all variables must be box-bounded");
    if (lower[j] > upper[j]) throw std::invalid_argument("variable box is empty");
    if (!std::isfinite(objective[j])) throw std::invalid_argument("objective must be finite");
  }
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (col_idx[k] < 0 || col_idx[k] >= m) throw std::invalid_argument("column index out of range");
    if (!std::isfinite(coeffs[k])) throw std::invalid_argument("coefficients must be finite");
  }
  for (double b : rhs)
    if (!std::isfinite(b)) throw std::invalid_argument("rhs must be finite");
  if (row_ptr.size() != rhs.size() + 1) throw std::invalid_argument("row structure corrupt");
}

namespace {

struct Csc {
  std::vector<std::size_t> ptr;
  std::vector<int> row;
  std::vector<double> val;
};

Csc build_csc(const LinearProgram& lp) {
  Csc csc;
  const int m = lp.num_vars();
  const int p = lp.num_rows();
  csc.ptr.assign(m + 1, 0);
  for (int j : lp.col_idx) ++csc.ptr[j + 1];
  for (int j = 0; j < m; ++j) csc.ptr[j + 1] += csc.ptr[j];
  csc.row.resize(lp.coeffs.size());
  csc.val.resize(lp.coeffs.size());
  std::vector<std::size_t> cursor(csc.ptr.begin(), csc.ptr.end() - 1);
  for (int i = 0; i < p; ++i)
    for (std::size_t k = lp.row_ptr[i]; k < lp.row_ptr[i + 1]; ++k) {
      const int j = lp.col_idx[k];
      csc.row[cursor[j]] = i;
      csc.val[cursor[j]] = lp.coeffs[k];
      ++cursor[j];
    }
  return csc;
}

enum class VarState : std::uint8_t { kAtLower, kAtUpper, kBasic };

// Bounded-variable primal simplex over the extended system
// A x + s - t = b with structural boxes, slacks s >= 0 and phase-1
// artificials t >= 0 (pinned to [0,0] in phase 2).
class Simplex {
 public:
  Simplex(const LinearProgram& lp, double tol)
      : lp_(lp), csc_(build_csc(lp)), tol_(tol), m_(lp.num_vars()), p_(lp.num_rows()) {}

  LpSolution run() {
    LpSolution sol;
    setup();
    const long cap = 50L * (p_ + m_ + 1);

    if (num_artificial_ > 0) {
      phase_ = 1;
      if (!iterate(cap, sol)) return sol;
      if (objective_value() < -1e-7) {
        sol.status = LpStatus::kInfeasible;
        sol.message = "phase-1 optimum below zero";
        extract_farkas(sol);
        sol.pivots = pivots_;
        return sol;
      }
      for (int j = m_ + p_; j < total_; ++j) upper_ext_[j] = 0.0;  // pin artificials
    }
    phase_ = 2;
    if (!iterate(cap, sol)) return sol;
    return finalize(sol);
  }

 private:
  void setup() {
    // Structural variables start at their lower bound; rows whose slack would
    // be negative get an artificial basic column instead.
    state_.assign(m_ + p_, VarState::kAtLower);
    value_.assign(m_ + p_, 0.0);
    for (int j = 0; j < m_; ++j) value_[j] = lp_.lower[j];
    std::vector<double> slack(p_, 0.0);
    for (int i = 0; i < p_; ++i) slack[i] = lp_.rhs[i];
    for (int j = 0; j < m_; ++j)
      if (value_[j] != 0.0)
        for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k)
          slack[csc_.row[k]] -= csc_.val[k] * value_[j];

    basis_.assign(p_, -1);
    artificial_row_.clear();
    for (int i = 0; i < p_; ++i) {
      if (slack[i] >= 0.0) {
        basis_[i] = m_ + i;
        state_[m_ + i] = VarState::kBasic;
        value_[m_ + i] = slack[i];
      } else {
        artificial_row_.push_back(i);
      }
    }
    num_artificial_ = static_cast<int>(artificial_row_.size());
    total_ = m_ + p_ + num_artificial_;
    state_.resize(total_, VarState::kAtLower);
    value_.resize(total_, 0.0);
    lower_ext_.assign(total_, 0.0);
    upper_ext_.assign(total_, kInf);
    for (int j = 0; j < m_; ++j) {
      lower_ext_[j] = lp_.lower[j];
      upper_ext_[j] = lp_.upper[j];
    }
    for (int a = 0; a < num_artificial_; ++a) {
      const int i = artificial_row_[a];
      const int j = m_ + p_ + a;
      basis_[i] = j;
      state_[j] = VarState::kBasic;
      value_[j] = -slack[i];
    }
    binv_.assign(static_cast<std::size_t>(p_) * p_, 0.0);
    for (int i = 0; i < p_; ++i)
      binv_[static_cast<std::size_t>(i) * p_ + i] = basis_[i] >= m_ + p_ ? -1.0 : 1.0;
    pivots_ = 0;
  }

  double cost(int j) const {
    if (phase_ == 1) return j >= m_ + p_ ? -1.0 : 0.0;
    return j < m_ ? lp_.objective[j] : 0.0;
  }

  // column j of the extended matrix into dense work vector
  void scatter_column(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (j < m_) {
      for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k) out[csc_.row[k]] = csc_.val[k];
    } else if (j < m_ + p_) {
      out[j - m_] = 1.0;
    } else {
      out[artificial_row_[j - m_ - p_]] = -1.0;
    }
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(p_, 0.0);
    for (int r = 0; r < p_; ++r) {
      const double cb = cost(basis_[r]);
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(r) * p_];
      for (int i = 0; i < p_; ++i) y[i] += cb * row[i];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost(j);
    if (j < m_) {
      for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k)
        d -= y[csc_.row[k]] * csc_.val[k];
    } else if (j < m_ + p_) {
      d -= y[j - m_];
    } else {
      d += y[artificial_row_[j - m_ - p_]];
    }
    return d;
  }

  double objective_value() const {
    double obj = 0.0;
    for (int j = 0; j < total_; ++j)
      if (cost(j) != 0.0) obj += cost(j) * value_[j];
    return obj;
  }

  // w = Binv * column(j)
  void ftran(int j, std::vector<double>& w) const {
    w.assign(p_, 0.0);
    if (j < m_) {
      for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k) {
        const int i = csc_.row[k];
        const double a = csc_.val[k];
        for (int r = 0; r < p_; ++r) w[r] += binv_[static_cast<std::size_t>(r) * p_ + i] * a;
      }
    } else if (j < m_ + p_) {
      const int i = j - m_;
      for (int r = 0; r < p_; ++r) w[r] = binv_[static_cast<std::size_t>(r) * p_ + i];
    } else {
      const int i = artificial_row_[j - m_ - p_];
      for (int r = 0; r < p_; ++r) w[r] = -binv_[static_cast<std::size_t>(r) * p_ + i];
    }
  }

  bool refactorize() {
    // Rebuild Binv from the basis columns by Gauss-Jordan with partial pivot.
    std::vector<double> b(static_cast<std::size_t>(p_) * p_, 0.0);
    std::vector<double> col(p_);
    for (int r = 0; r < p_; ++r) {
      scatter_column(basis_[r], col);
      for (int i = 0; i < p_; ++i) b[static_cast<std::size_t>(i) * p_ + r] = col[i];
    }
    std::vector<double> inv(static_cast<std::size_t>(p_) * p_, 0.0);
    for (int i = 0; i < p_; ++i) inv[static_cast<std::size_t>(i) * p_ + i] = 1.0;
    for (int c = 0; c < p_; ++c) {
      int piv = c;
      double best = std::abs(b[static_cast<std::size_t>(c) * p_ + c]);
      for (int i = c + 1; i < p_; ++i) {
        const double cand = std::abs(b[static_cast<std::size_t>(i) * p_ + c]);
        if (cand > best) {
          best = cand;
          piv = i;
        }
      }
      if (best < 1e-12) return false;
      if (piv != c) {
        for (int k = 0; k < p_; ++k) {
          std::swap(b[static_cast<std::size_t>(piv) * p_ + k], b[static_cast<std::size_t>(c) * p_ + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * p_ + k],
                    inv[static_cast<std::size_t>(c) * p_ + k]);
        }
      }
      const double d = b[static_cast<std::size_t>(c) * p_ + c];
      for (int k = 0; k < p_; ++k) {
        b[static_cast<std::size_t>(c) * p_ + k] /= d;
        inv[static_cast<std::size_t>(c) * p_ + k] /= d;
      }
      for (int i = 0; i < p_; ++i) {
        if (i == c) continue;
        const double f = b[static_cast<std::size_t>(i) * p_ + c];
        if (f == 0.0) continue;
        for (int k = 0; k < p_; ++k) {
          b[static_cast<std::size_t>(i) * p_ + k] -= f * b[static_cast<std::size_t>(c) * p_ + k];
          inv[static_cast<std::size_t>(i) * p_ + k] -= f * inv[static_cast<std::size_t>(c) * p_ + k];
        }
      }
    }
    binv_.swap(inv);
    recompute_basic_values();
    return true;
  }

  void recompute_basic_values() {
    std::vector<double> t = lp_.rhs;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic) continue;
      const double xj = state_[j] == VarState::kAtLower ? lower_ext_[j] : upper_ext_[j];
      value_[j] = xj;
      if (xj == 0.0) continue;
      if (j < m_) {
        for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k)
          t[csc_.row[k]] -= csc_.val[k] * xj;
      } else if (j < m_ + p_) {
        t[j - m_] -= xj;
      } else {
        t[artificial_row_[j - m_ - p_]] += xj;
      }
    }
    for (int r = 0; r < p_; ++r) {
      double acc = 0.0;
      const double* row = &binv_[static_cast<std::size_t>(r) * p_];
      for (int i = 0; i < p_; ++i) acc += row[i] * t[i];
      value_[basis_[r]] = acc;
    }
  }

  // Returns false and fills sol on hard failure; true when the phase reached
  // its optimum.
  bool iterate(long cap, LpSolution& sol) {
    std::vector<double> y, w;
    int stall = 0;
    bool bland = false;
    double last_obj = objective_value();
    int since_refactor = 0;

    while (true) {
      if (pivots_ >= cap) {
        sol.status = LpStatus::kNumericFailure;
        sol.message = "iteration cap reached";
        sol.pivots = pivots_;
        return false;
      }
      compute_duals(y);

      int enter = -1;
      double enter_score = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        if (upper_ext_[j] - lower_ext_[j] < 1e-15) continue;  // fixed
        const double d = reduced_cost(j, y);
        const bool eligible = (state_[j] == VarState::kAtLower && d > tol_) ||
                              (state_[j] == VarState::kAtUpper && d < -tol_);
        if (!eligible) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (std::abs(d) > enter_score) {
          enter_score = std::abs(d);
          enter = j;
        }
      }
      if (enter < 0) return true;  // phase optimum

      const double dir = state_[enter] == VarState::kAtLower ? 1.0 : -1.0;
      ftran(enter, w);

      // Ratio test; ties break toward the lowest variable index.
      double t_max = upper_ext_[enter] - lower_ext_[enter];  // bound flip cap
      int leave_r = -1;
      int leave_var = -1;
      double t_best = t_max;
      bool flip = true;
      for (int r = 0; r < p_; ++r) {
        const double delta = dir * w[r];
        const int bv = basis_[r];
        double t_r = kInf;
        if (delta > 1e-11) {
          t_r = (value_[bv] - lower_ext_[bv]) / delta;
        } else if (delta < -1e-11) {
          if (upper_ext_[bv] == kInf) continue;
          t_r = (upper_ext_[bv] - value_[bv]) / (-delta);
        } else {
          continue;
        }
        if (t_r < 0.0) t_r = 0.0;
        if (t_r < t_best - 1e-12 || (t_r < t_best + 1e-12 && !flip && bv < leave_var) ||
            (t_r < t_best + 1e-12 && flip && t_r < t_best)) {
          t_best = t_r;
          leave_r = r;
          leave_var = bv;
          flip = false;
        }
      }
      if (flip && !(t_best < kInf)) {
        sol.status = LpStatus::kNumericFailure;
        sol.message = "unbounded direction";
        sol.pivots = pivots_;
        return false;
      }

      const double t = t_best;
      // Move the entering variable and update basics.
      value_[enter] = (state_[enter] == VarState::kAtLower ? lower_ext_[enter]
                                                           : upper_ext_[enter]) +
                      dir * t;
      if (t != 0.0)
        for (int r = 0; r < p_; ++r) value_[basis_[r]] -= t * dir * w[r];

      if (flip) {
        state_[enter] = state_[enter] == VarState::kAtLower ? VarState::kAtUpper
                                                            : VarState::kAtLower;
      } else {
        const double piv = w[leave_r];
        if (std::abs(piv) < 1e-9) {
          if (!refactorize()) {
            sol.status = LpStatus::kNumericFailure;
            sol.message = "singular basis";
            sol.pivots = pivots_;
            return false;
          }
          continue;  // retry with a clean factorization
        }
        const double delta = dir * w[leave_r];
        state_[leave_var] = delta > 0.0 ? VarState::kAtLower : VarState::kAtUpper;
        if (upper_ext_[leave_var] == kInf && state_[leave_var] == VarState::kAtUpper)
          state_[leave_var] = VarState::kAtLower;
        value_[leave_var] = state_[leave_var] == VarState::kAtLower ? lower_ext_[leave_var]
                                                                    : upper_ext_[leave_var];
        state_[enter] = VarState::kBasic;
        basis_[leave_r] = enter;
        // Product-form update of Binv.
        double* prow = &binv_[static_cast<std::size_t>(leave_r) * p_];
        for (int k = 0; k < p_; ++k) prow[k] /= piv;
        for (int r = 0; r < p_; ++r) {
          if (r == leave_r) continue;
          const double f = w[r];
          if (f == 0.0) continue;
          double* row = &binv_[static_cast<std::size_t>(r) * p_];
          for (int k = 0; k < p_; ++k) row[k] -= f * prow[k];
        }
      }
      ++pivots_;
      if (++since_refactor >= 100) {
        since_refactor = 0;
        if (!refactorize()) {
          sol.status = LpStatus::kNumericFailure;
          sol.message = "singular basis";
          sol.pivots = pivots_;
          return false;
        }
      }

      const double obj = objective_value();
      if (obj > last_obj + 1e-12 * (1.0 + std::abs(last_obj))) {
        stall = 0;
        bland = false;
      } else if (++stall > 200) {
        bland = true;  // anti-cycling
      }
      last_obj = obj;
    }
  }

  void extract_farkas(LpSolution& sol) const {
    std::vector<double> y;
    compute_duals(y);
    // Phase-1 duals are the certificate multipliers; validate after clamping.
    std::vector<double> w(p_);
    for (int i = 0; i < p_; ++i) w[i] = std::max(0.0, y[i]);
    Neumaier u;
    for (int i = 0; i < p_; ++i) u.add(-w[i] * lp_.rhs[i]);
    for (int j = 0; j < m_; ++j) {
      double d = 0.0;
      for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k)
        d += w[csc_.row[k]] * csc_.val[k];
      u.add(d > 0.0 ? d * lp_.lower[j] : d * lp_.upper[j]);
    }
    // u.total() > 0 means: for every x in the boxes, w^T A x > w^T b, which
    // no feasible point can satisfy.
    if (u.total() > 1e-9) {
      sol.has_farkas = true;
      sol.farkas = std::move(w);
    }
  }

  LpSolution finalize(LpSolution& sol) {
    if (!refactorize()) {
      sol.status = LpStatus::kNumericFailure;
      sol.message = "singular basis at optimum";
      sol.pivots = pivots_;
      return sol;
    }
    // Primal feasibility audit.
    double scale = 1.0;
    for (int i = 0; i < p_; ++i) scale = std::max(scale, std::abs(lp_.rhs[i]));
    for (int j = 0; j < total_; ++j) {
      const double lo = lower_ext_[j], hi = upper_ext_[j];
      if (value_[j] < lo - 1e-6 * scale || (hi != kInf && value_[j] > hi + 1e-6 * scale)) {
        sol.status = LpStatus::kNumericFailure;
        sol.message = "basic variable out of bounds at optimum";
        sol.pivots = pivots_;
        return sol;
      }
    }
    sol.x.assign(value_.begin(), value_.begin() + m_);
    Neumaier obj;
    for (int j = 0; j < m_; ++j) obj.add(lp_.objective[j] * sol.x[j]);
    sol.objective = obj.total();

    std::vector<double> y;
    compute_duals(y);
    sol.row_duals.assign(p_, 0.0);
    for (int i = 0; i < p_; ++i) sol.row_duals[i] = std::max(0.0, y[i]);
    sol.reduced_costs.assign(m_, 0.0);
    for (int j = 0; j < m_; ++j) {
      double d = lp_.objective[j];
      for (std::size_t k = csc_.ptr[j]; k < csc_.ptr[j + 1]; ++k)
        d -= sol.row_duals[csc_.row[k]] * csc_.val[k];
      sol.reduced_costs[j] = d;
    }
    sol.pivots = pivots_;
    sol.status = LpStatus::kOptimal;
    sol.dual_bound = dual_upper_bound(lp_, sol);
    const double gap = sol.dual_bound - sol.objective;
    if (!(gap <= std::max(1e-6, 1e-6 * std::abs(sol.dual_bound)))) {
      sol.status = LpStatus::kNumericFailure;
      sol.message = "duality gap not closed";
    }
    return sol;
  }

  const LinearProgram& lp_;
  Csc csc_;
  double tol_;
  int m_ = 0, p_ = 0, total_ = 0;
  int phase_ = 2;
  int num_artificial_ = 0;
  std::vector<int> artificial_row_;
  std::vector<int> basis_;
  std::vector<VarState> state_;
  std::vector<double> value_;
  std::vector<double> lower_ext_, upper_ext_;
  std::vector<double> binv_;
  long pivots_ = 0;
};

}  // namespace

LpSolution solve(const LinearProgram& lp, double tol) {
  lp.validate();
  Simplex simplex(lp, tol);
  return simplex.run();
}

double dual_upper_bound(const LinearProgram& lp, std::span<const double> row_duals) {
  if (static_cast<int>(row_duals.size()) != lp.num_rows())
    throw std::invalid_argument("multiplier count does not match row count");
  const int m = lp.num_vars();
  std::vector<double> y(row_duals.begin(), row_duals.end());
  for (double& v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("multipliers must be finite");
    v = std::max(0.0, v);
  }
  std::vector<double> aty(m, 0.0);
  std::vector<double> aty_comp(m, 0.0);
  for (int i = 0; i < lp.num_rows(); ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (std::size_t k = lp.row_ptr[i]; k < lp.row_ptr[i + 1]; ++k) {
      const int j = lp.col_idx[k];
      const double x = yi * lp.coeffs[k];
      const double t = aty[j] + x;
      if (std::abs(aty[j]) >= std::abs(x))
        aty_comp[j] += (aty[j] - t) + x;
      else
        aty_comp[j] += (x - t) + aty[j];
      aty[j] = t;
    }
  }
  Neumaier u;
  for (int i = 0; i < lp.num_rows(); ++i) u.add(y[i] * lp.rhs[i]);
  for (int j = 0; j < m; ++j) {
    const double d = lp.objective[j] - (aty[j] + aty_comp[j]);
    u.add(d > 0.0 ? d * lp.upper[j] : d * lp.lower[j]);
  }
  const double bound = u.total();
  if (!std::isfinite(bound)) throw std::runtime_error("dual bound is not finite");
  return bound;
}

double dual_upper_bound(const LinearProgram& lp, const LpSolution& sol) {
  return dual_upper_bound(lp, std::span<const double>(sol.row_duals));
}

ReducedLp reduce_by_orbits(const LinearProgram& lp, const OrbitMap& orbits) {
  const int m = lp.num_vars();
  const int p = lp.num_rows();
  if (static_cast<int>(orbits.var_orbit.size()) != m ||
      static_cast<int>(orbits.row_orbit.size()) != p)
    throw std::invalid_argument("orbit labeling does not match program dimensions");

  int num_vo = 0, num_ro = 0;
  for (int o : orbits.var_orbit) num_vo = std::max(num_vo, o + 1);
  for (int o : orbits.row_orbit) num_ro = std::max(num_ro, o + 1);

  ReducedLp red;
  red.orbits = orbits;
  red.var_orbit_size.assign(num_vo, 0);
  red.row_orbit_size.assign(num_ro, 0);

  std::vector<int> var_rep(num_vo, -1);
  for (int j = 0; j < m; ++j) {
    const int o = orbits.var_orbit[j];
    if (o < 0) throw std::invalid_argument("negative variable orbit id");
    ++red.var_orbit_size[o];
    if (var_rep[o] < 0) var_rep[o] = j;
  }
  std::vector<int> row_rep(num_ro, -1);
  for (int i = 0; i < p; ++i) {
    const int o = orbits.row_orbit[i];
    if (o < 0) throw std::invalid_argument("negative row orbit id");
    ++red.row_orbit_size[o];
    if (row_rep[o] < 0) row_rep[o] = i;
  }

  red.lp.objective.assign(num_vo, 0.0);
  red.lp.lower.assign(num_vo, 0.0);
  red.lp.upper.assign(num_vo, 0.0);
  for (int o = 0; o < num_vo; ++o) {
    if (var_rep[o] < 0) throw std::invalid_argument("empty variable orbit");
    red.lp.lower[o] = lp.lower[var_rep[o]];
    red.lp.upper[o] = lp.upper[var_rep[o]];
  }
  for (int j = 0; j < m; ++j) {
    const int o = orbits.var_orbit[j];
    if (lp.lower[j] != red.lp.lower[o] || lp.upper[j] != red.lp.upper[o])
      throw std::invalid_argument("variable boxes are not constant on an orbit");
    if (std::abs(lp.objective[j] - lp.objective[var_rep[o]]) >
        1e-12 * (1.0 + std::abs(lp.objective[j])))
      throw std::invalid_argument("objective is not constant on a variable orbit");
    red.lp.objective[o] += lp.objective[j];
  }

  // Collapse each row onto variable orbits; every member of a row orbit must
  // collapse to the representative's form and share its rhs.
  std::vector<double> scratch(num_vo, 0.0);
  std::vector<int> stamp(num_vo, -1);
  std::vector<int> touched;
  const auto collapse = [&](int i, std::vector<std::pair<int, double>>& out) {
    touched.clear();
    for (std::size_t k = lp.row_ptr[i]; k < lp.row_ptr[i + 1]; ++k) {
      const int o = orbits.var_orbit[lp.col_idx[k]];
      if (stamp[o] != i) {
        stamp[o] = i;
        scratch[o] = 0.0;
        touched.push_back(o);
      }
      scratch[o] += lp.coeffs[k];
    }
    std::sort(touched.begin(), touched.end());
    out.clear();
    for (int o : touched) out.emplace_back(o, scratch[o]);
  };
  std::vector<std::vector<std::pair<int, double>>> rep_rows(num_ro);
  for (int o = 0; o < num_ro; ++o) {
    if (row_rep[o] < 0) throw std::invalid_argument("empty row orbit");
    collapse(row_rep[o], rep_rows[o]);
  }
  std::vector<std::pair<int, double>> probe;
  for (int i = 0; i < p; ++i) {
    const int o = orbits.row_orbit[i];
    if (lp.rhs[i] != lp.rhs[row_rep[o]])
      throw std::invalid_argument("rhs is not constant on a row orbit");
    if (i == row_rep[o]) continue;
    collapse(i, probe);
    if (probe.size() != rep_rows[o].size())
      throw std::invalid_argument("row orbit collapse mismatch");
    for (std::size_t k = 0; k < probe.size(); ++k) {
      if (probe[k].first != rep_rows[o][k].first ||
          std::abs(probe[k].second - rep_rows[o][k].second) >
              1e-9 * (1.0 + std::abs(probe[k].second)))
        throw std::invalid_argument("row orbit collapse mismatch");
    }
  }
  for (int o = 0; o < num_ro; ++o)
    red.lp.add_row(std::span<const std::pair<int, double>>(rep_rows[o].data(),
                                                           rep_rows[o].size()),
                   lp.rhs[row_rep[o]]);
  return red;
}

std::vector<double> lift_primal(const ReducedLp& red, std::span<const double> x_reduced) {
  std::vector<double> x(red.orbits.var_orbit.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = x_reduced[red.orbits.var_orbit[j]];
  return x;
}

std::vector<double> lift_row_duals(const ReducedLp& red, std::span<const double> y_reduced) {
  std::vector<double> y(red.orbits.row_orbit.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int o = red.orbits.row_orbit[i];
    y[i] = y_reduced[o] / static_cast<double>(red.row_orbit_size[o]);
  }
  return y;
}

void write_lp_format(const LinearProgram& lp, std::ostream& os) {
  const auto vname = [&](int j) {
    if (j < static_cast<int>(lp.var_names.size()) && !lp.var_names[j].empty())
      return lp.var_names[j];
    return "x" + std::to_string(j);
  };
  os << "\\ gicert LP dump\nMaximize\n obj:";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.objective[j] == 0.0) continue;
    os << (lp.objective[j] >= 0 ? " + " : " - ") << std::abs(lp.objective[j]) << " " << vname(j);
  }
  os << "\nSubject To\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    os << " ";
    if (i < static_cast<int>(lp.row_names.size()) && !lp.row_names[i].empty())
      os << lp.row_names[i];
    else
      os << "r" << i;
    os << ":";
    for (std::size_t k = lp.row_ptr[i]; k < lp.row_ptr[i + 1]; ++k)
      os << (lp.coeffs[k] >= 0 ? " + " : " - ") << std::abs(lp.coeffs[k]) << " "
         << vname(lp.col_idx[k]);
    os << " <= " << lp.rhs[i] << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j)
    os << " " << lp.lower[j] << " <= " << vname(j) << " <= " << lp.upper[j] << "\n";
  os << "End\n";
}

}  // namespace gicert
