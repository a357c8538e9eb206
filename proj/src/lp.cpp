#include "vpp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpp/error.hpp"

namespace vpp::lp {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

std::size_t LpProblem::add_column(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return objective.size() - 1;
}

std::size_t LpProblem::add_row(std::vector<std::size_t> index, std::vector<double> value,
                               RowSense sense, double rhs) {
  rows.push_back({std::move(index), std::move(value), sense, rhs});
  return rows.size() - 1;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kSingularTol = 1e-11;

constexpr std::size_t kNoPos = static_cast<std::size_t>(-1);

enum class NonbasicState : unsigned char { basic, at_lower, at_upper, at_zero };

void check_problem(const LpProblem& p) {
  const std::size_t n = p.objective.size();
  if (p.lower.size() != n || p.upper.size() != n) {
    throw Error(ErrorCode::invalid_input, "lp: bound vectors differ in length from objective");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(p.objective[j]) || std::isnan(p.lower[j]) || std::isnan(p.upper[j]) ||
        std::isinf(p.objective[j])) {
      throw Error(ErrorCode::invalid_input, "lp: NaN or infinite data in column " + std::to_string(j));
    }
    if (p.lower[j] > p.upper[j] || p.lower[j] == kInf || p.upper[j] == -kInf) {
      throw Error(ErrorCode::invalid_input, "lp: inconsistent bounds on column " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const Row& row = p.rows[i];
    if (row.index.size() != row.value.size()) {
      throw Error(ErrorCode::invalid_input, "lp: row " + std::to_string(i) + " index/value mismatch");
    }
    if (!std::isfinite(row.rhs)) {
      throw Error(ErrorCode::invalid_input, "lp: row " + std::to_string(i) + " has non-finite rhs");
    }
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      if (row.index[k] >= n || !std::isfinite(row.value[k])) {
        throw Error(ErrorCode::invalid_input, "lp: row " + std::to_string(i) + " has a bad entry");
      }
    }
  }
}

class Simplex {
 public:
  Simplex(const LpProblem& p, const LpOptions& opt) : opt_(opt) {
    n_ = p.objective.size();
    m_ = p.rows.size();
    const std::size_t total = n_ + m_;
    cost_.assign(total, 0.0);
    lo_.assign(total, 0.0);
    up_.assign(total, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      cost_[j] = p.objective[j];
      lo_[j] = p.lower[j];
      up_[j] = p.upper[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& row = p.rows[i];
      lo_[n_ + i] = row.sense == RowSense::less_equal ? -kInf : row.rhs;
      up_[n_ + i] = row.sense == RowSense::greater_equal ? kInf : row.rhs;
    }
    // Column-compressed copy of the structural part; duplicates are summed.
    std::vector<std::size_t> counts(n_ + 1, 0);
    for (const Row& row : p.rows) {
      for (std::size_t j : row.index) ++counts[j + 1];
    }
    for (std::size_t j = 0; j < n_; ++j) counts[j + 1] += counts[j];
    col_start_ = counts;
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& row = p.rows[i];
      for (std::size_t k = 0; k < row.index.size(); ++k) {
        const std::size_t slot = fill[row.index[k]]++;
        col_row_[slot] = i;
        col_val_[slot] = row.value[k];
      }
    }
    double cmax = 0.0;
    for (double c : p.objective) cmax = std::max(cmax, std::abs(c));
    dual_tol_ = 0.1 * opt_.tol * (1.0 + cmax);
    feas_tol_ = std::min(1e-9, opt_.tol);
    max_iters_ = opt_.max_iters ? opt_.max_iters : 50 * (m_ + n_) + 100;
  }

  LpSolution run() {
    initial_basis();
    LpSolution sol;
    sol.status = iterate();
    sol.iterations = iterations_;
    extract(sol);
    return sol;
  }

 private:
  // ----- basis bookkeeping -------------------------------------------------

  void initial_basis() {
    const std::size_t total = n_ + m_;
    x_.assign(total, 0.0);
    state_.assign(total, NonbasicState::at_zero);
    for (std::size_t j = 0; j < n_; ++j) place_at_bound(j);
    head_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      state_[n_ + i] = NonbasicState::basic;
    }
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = -1.0;
    recompute_basics();
  }

  void place_at_bound(std::size_t j) {
    if (std::isfinite(lo_[j]) && std::isfinite(up_[j])) {
      // Nearest finite bound keeps a crash from an interior value cheap.
      const bool lower = std::abs(x_[j] - lo_[j]) <= std::abs(up_[j] - x_[j]);
      state_[j] = lower ? NonbasicState::at_lower : NonbasicState::at_upper;
      x_[j] = lower ? lo_[j] : up_[j];
    } else if (std::isfinite(lo_[j])) {
      state_[j] = NonbasicState::at_lower;
      x_[j] = lo_[j];
    } else if (std::isfinite(up_[j])) {
      state_[j] = NonbasicState::at_upper;
      x_[j] = up_[j];
    } else {
      state_[j] = NonbasicState::at_zero;
      x_[j] = 0.0;
    }
  }

  // x_B = B^{-1} (-N x_N) for the system A x - r = 0.
  void recompute_basics() {
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == NonbasicState::basic || x_[j] == 0.0) continue;
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        rhs[col_row_[k]] -= col_val_[k] * x_[j];
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (state_[n_ + i] != NonbasicState::basic) rhs[i] += x_[n_ + i];
    }
    std::vector<double> xb(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const double v = rhs[k];
      if (v == 0.0) continue;
      const double* col = &binv_[k * m_];
      for (std::size_t i = 0; i < m_; ++i) xb[i] += col[i] * v;
    }
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
  }

  // Rebuilds B^{-1} from the logical basis by pivoting the structural basic
  // columns back in one at a time. A column with no acceptable pivot among
  // the remaining logical slots is dropped to a bound and its logical stays
  // basic, so a singular basis repairs itself.
  void refactor() {
    std::vector<std::size_t> structural;
    std::vector<char> target_basic(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (head_[i] < n_) structural.push_back(head_[i]);
      else target_basic[head_[i] - n_] = 1;
    }
    std::sort(structural.begin(), structural.end(), [&](std::size_t a, std::size_t b) {
      const std::size_t na = col_start_[a + 1] - col_start_[a];
      const std::size_t nb = col_start_[b + 1] - col_start_[b];
      return na != nb ? na < nb : a < b;
    });
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      binv_[i * m_ + i] = -1.0;
      head_[i] = n_ + i;
    }
    std::vector<double> alpha;
    for (std::size_t var : structural) {
      ftran(var, alpha);
      double amax = 0.0;
      for (double a : alpha) amax = std::max(amax, std::abs(a));
      std::size_t best = kNoPos;
      double best_abs = kSingularTol * std::max(1.0, amax);
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t h = head_[i];
        if (h < n_ || target_basic[h - n_]) continue;
        if (std::abs(alpha[i]) > best_abs) {
          best_abs = std::abs(alpha[i]);
          best = i;
        }
      }
      if (best == kNoPos) {
        place_at_bound(var);
        continue;
      }
      pivot(var, best, alpha);
    }
    for (std::size_t i = 0; i < m_; ++i) state_[head_[i]] = NonbasicState::basic;
  }

  void full_refresh() {
    refactor();
    recompute_basics();
    since_refactor_ = 0;
  }

  // ----- pricing -----------------------------------------------------------

  double infeasibility(std::size_t var) const {
    const double v = x_[var];
    if (v < lo_[var] - feas_tol_) return lo_[var] - v;
    if (v > up_[var] + feas_tol_) return v - up_[var];
    return 0.0;
  }

  bool any_infeasible() const {
    for (std::size_t i = 0; i < m_; ++i) {
      if (infeasibility(head_[i]) > 0.0) return true;
    }
    return false;
  }

  double phase_cost(std::size_t var, bool phase1) const {
    if (!phase1) return var < n_ ? cost_[var] : 0.0;
    if (x_[var] < lo_[var] - feas_tol_) return -1.0;
    if (x_[var] > up_[var] + feas_tol_) return 1.0;
    return 0.0;
  }

  void compute_duals(bool phase1) {
    cb_nz_.clear();
    for (std::size_t i = 0; i < m_; ++i) {
      if (phase_cost(head_[i], phase1) != 0.0) cb_nz_.push_back(i);
    }
    y_.assign(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const double* col = &binv_[k * m_];
      double v = 0.0;
      for (std::size_t i : cb_nz_) v += phase_cost(head_[i], phase1) * col[i];
      y_[k] = v;
    }
  }

  double reduced_cost(std::size_t var, bool phase1) const {
    if (var >= n_) return y_[var - n_];  // logical column is -e_i, cost 0
    double d = phase1 ? 0.0 : cost_[var];
    for (std::size_t k = col_start_[var]; k < col_start_[var + 1]; ++k) {
      d -= y_[col_row_[k]] * col_val_[k];
    }
    return d;
  }

  // Returns the entering variable and its direction (+1 increase, -1 decrease),
  // or total() when no candidate prices out.
  std::pair<std::size_t, int> choose_entering(bool phase1, double& d_enter) const {
    const std::size_t total = n_ + m_;
    const double tol = phase1 ? 1e-9 : dual_tol_;
    std::size_t best = total;
    int best_dir = 0;
    double best_score = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      const NonbasicState st = state_[j];
      if (st == NonbasicState::basic || lo_[j] == up_[j]) continue;
      const double d = reduced_cost(j, phase1);
      int dir = 0;
      if (st == NonbasicState::at_lower && d < -tol) dir = 1;
      else if (st == NonbasicState::at_upper && d > tol) dir = -1;
      else if (st == NonbasicState::at_zero && std::abs(d) > tol) dir = d < 0 ? 1 : -1;
      if (dir == 0) continue;
      if (bland_) {
        d_enter = d;
        return {j, dir};
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        best_dir = dir;
        d_enter = d;
      }
    }
    return {best, best_dir};
  }

  void ftran(std::size_t var, std::vector<double>& alpha) const {
    alpha.assign(m_, 0.0);
    if (var >= n_) {
      const std::size_t r = var - n_;
      const double* col = &binv_[r * m_];
      for (std::size_t i = 0; i < m_; ++i) alpha[i] = -col[i];
      return;
    }
    for (std::size_t k = col_start_[var]; k < col_start_[var + 1]; ++k) {
      const std::size_t r = col_row_[k];
      const double a = col_val_[k];
      const double* col = &binv_[r * m_];
      for (std::size_t i = 0; i < m_; ++i) alpha[i] += col[i] * a;
    }
  }

  // ----- ratio tests -------------------------------------------------------

  struct Step {
    double theta = kInf;
    std::size_t leave_pos = static_cast<std::size_t>(-1);  // basis position, or none for a flip
    bool leave_at_lower = true;
    bool flip = false;
  };

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Phase 2: Harris two-pass test, or the textbook test under Bland's rule.
  Step ratio_phase2(std::size_t enter, const std::vector<double>& delta, double ptol) const {
    Step step;
    const double range = up_[enter] - lo_[enter];
    const double slack = bland_ ? 0.0 : feas_tol_;
    double theta_max = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      const double di = delta[i];
      if (std::abs(di) <= ptol) continue;
      const std::size_t var = head_[i];
      double r = kInf;
      if (di < 0.0 && std::isfinite(lo_[var])) r = (x_[var] - lo_[var] + slack) / -di;
      else if (di > 0.0 && std::isfinite(up_[var])) r = (up_[var] - x_[var] + slack) / di;
      theta_max = std::min(theta_max, r);
    }
    if (range <= theta_max) {
      step.theta = range;
      step.flip = true;
      return step;
    }
    if (!std::isfinite(theta_max)) return step;  // unbounded ray
    double best_abs = -1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double di = delta[i];
      if (std::abs(di) <= ptol) continue;
      const std::size_t var = head_[i];
      double r = kInf;
      bool at_lower = true;
      if (di < 0.0 && std::isfinite(lo_[var])) r = (x_[var] - lo_[var]) / -di;
      else if (di > 0.0 && std::isfinite(up_[var])) {
        r = (up_[var] - x_[var]) / di;
        at_lower = false;
      }
      if (r > theta_max) continue;
      bool take;
      if (bland_) {
        // Minimum ratio, ties broken by the lowest variable index.
        take = step.leave_pos == kNone || r < step.theta ||
               (r == step.theta && var < head_[step.leave_pos]);
      } else {
        take = std::abs(di) > best_abs;
      }
      if (take) {
        best_abs = std::abs(di);
        step.theta = r;
        step.leave_pos = i;
        step.leave_at_lower = at_lower;
      }
    }
    step.theta = std::max(step.theta, 0.0);
    return step;
  }

  // Phase 1: long-step test over the breakpoints of the piecewise-linear sum
  // of infeasibilities.
  Step ratio_phase1(std::size_t enter, const std::vector<double>& delta, double ptol,
                    double slope0) const {
    Step hard;
    const double range = up_[enter] - lo_[enter];
    if (std::isfinite(range)) {
      hard.theta = range;
      hard.flip = true;
    }
    struct Breakpoint {
      double theta;
      std::size_t pos;
      bool at_lower;
      double weight;
    };
    std::vector<Breakpoint> soft;
    for (std::size_t i = 0; i < m_; ++i) {
      const double di = delta[i];
      if (std::abs(di) <= ptol) continue;
      const std::size_t var = head_[i];
      const double v = x_[var];
      double r = kInf;
      bool at_lower = true;
      if (v < lo_[var] - feas_tol_) {
        if (di > 0.0) {
          soft.push_back({(lo_[var] - v) / di, i, true, di});
          if (std::isfinite(up_[var])) {
            r = (up_[var] - v) / di;
            at_lower = false;
          }
        }
      } else if (v > up_[var] + feas_tol_) {
        if (di < 0.0) {
          soft.push_back({(v - up_[var]) / -di, i, false, -di});
          if (std::isfinite(lo_[var])) r = (v - lo_[var]) / -di;
        }
      } else if (di < 0.0 && std::isfinite(lo_[var])) {
        r = std::max(0.0, (v - lo_[var]) / -di);
      } else if (di > 0.0 && std::isfinite(up_[var])) {
        r = std::max(0.0, (up_[var] - v) / di);
        at_lower = false;
      }
      if (r < hard.theta || (r == hard.theta && !hard.flip && hard.leave_pos != kNone &&
                             head_[i] < head_[hard.leave_pos])) {
        hard.theta = r;
        hard.leave_pos = i;
        hard.leave_at_lower = at_lower;
        hard.flip = false;
      }
    }
    std::sort(soft.begin(), soft.end(), [&](const Breakpoint& a, const Breakpoint& b) {
      if (a.theta != b.theta) return a.theta < b.theta;
      return head_[a.pos] < head_[b.pos];
    });
    double slope = slope0;
    for (const Breakpoint& bp : soft) {
      if (bp.theta >= hard.theta) break;
      slope += bp.weight;
      if (slope >= 0.0) {
        Step step;
        step.theta = bp.theta;
        step.leave_pos = bp.pos;
        step.leave_at_lower = bp.at_lower;
        return step;
      }
    }
    return hard;
  }

  // ----- main loop ---------------------------------------------------------

  void pivot(std::size_t enter, std::size_t pos, const std::vector<double>& alpha) {
    // Column-major inverse: only columns with a nonzero in the pivot row
    // change, and only in the rows where alpha is nonzero.
    const double piv = alpha[pos];
    alpha_nz_.clear();
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != pos && alpha[i] != 0.0) alpha_nz_.push_back(i);
    }
    pivot_row_.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) {
      double* col = &binv_[k * m_];
      const double v = col[pos];
      if (v == 0.0) {
        pivot_row_[k] = 0.0;
        continue;
      }
      const double w = v / piv;
      for (std::size_t i : alpha_nz_) col[i] -= alpha[i] * w;
      col[pos] = w;
      pivot_row_[k] = w;
    }
    head_[pos] = enter;
    state_[enter] = NonbasicState::basic;
  }

  LpStatus iterate() {
    std::vector<double> alpha;
    std::vector<double> delta(m_);
    std::size_t degenerate_run = 0;
    bool verified = false;
    bool duals_fresh = false;
    while (true) {
      if (iterations_ >= max_iters_) return LpStatus::iteration_limit;
      const bool phase1 = any_infeasible();
      // Phase-1 costs move with the basic values; phase-2 duals are updated
      // in place after each pivot and rebuilt on refactorization.
      if (phase1 || !duals_fresh || since_refactor_ == 0) compute_duals(phase1);
      duals_fresh = false;
      double d_enter = 0.0;
      const auto [enter, dir] = choose_entering(phase1, d_enter);
      if (enter == n_ + m_) {
        // No improving column. Confirm on a fresh factorization before
        // declaring the outcome.
        if (!verified && since_refactor_ > 0) {
          full_refresh();
          verified = true;
          continue;
        }
        return phase1 ? LpStatus::infeasible : LpStatus::optimal;
      }
      verified = false;
      ftran(enter, alpha);
      double amax = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        delta[i] = -dir * alpha[i];
        amax = std::max(amax, std::abs(alpha[i]));
      }
      const double ptol = kPivotTol * std::max(1.0, amax);
      const Step step = phase1 ? ratio_phase1(enter, delta, ptol, -std::abs(d_enter))
                               : ratio_phase2(enter, delta, ptol);
      if (!std::isfinite(step.theta)) {
        if (phase1) return LpStatus::infeasible;
        return LpStatus::unbounded;
      }
      ++iterations_;
      const double theta = step.theta;
      if (theta * std::abs(d_enter) <= 1e-12 * (1.0 + std::abs(objective_now()))) {
        if (++degenerate_run >= opt_.stall_threshold) bland_ = true;
      } else {
        degenerate_run = 0;
        bland_ = false;
      }
      if (theta != 0.0) {
        x_[enter] += dir * theta;
        for (std::size_t i = 0; i < m_; ++i) {
          if (delta[i] != 0.0) x_[head_[i]] += delta[i] * theta;
        }
      }
      if (step.flip) {
        const bool to_upper = dir > 0;
        state_[enter] = to_upper ? NonbasicState::at_upper : NonbasicState::at_lower;
        x_[enter] = to_upper ? up_[enter] : lo_[enter];
        continue;
      }
      const std::size_t leaving = head_[step.leave_pos];
      state_[leaving] = step.leave_at_lower ? NonbasicState::at_lower : NonbasicState::at_upper;
      x_[leaving] = step.leave_at_lower ? lo_[leaving] : up_[leaving];
      pivot(enter, step.leave_pos, alpha);
      if (!phase1) {
        // y += d_q * (row r of the updated inverse) zeroes the entering
        // reduced cost.
        for (std::size_t k = 0; k < m_; ++k) y_[k] += d_enter * pivot_row_[k];
        duals_fresh = true;
      }
      if (++since_refactor_ >= opt_.refactor_interval) full_refresh();
    }
  }

  double objective_now() const {
    double v = 0.0;
    for (std::size_t j = 0; j < n_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  void extract(LpSolution& sol) {
    compute_duals(false);
    sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.dual = y_;
    sol.reduced_cost.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) sol.reduced_cost[j] = reduced_cost(j, false);
    sol.row_activity.assign(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        sol.row_activity[col_row_[k]] += col_val_[k] * x_[j];
      }
    }
    sol.objective_value = objective_now();
  }

  LpOptions opt_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> cost_, lo_, up_, x_;
  std::vector<std::size_t> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<NonbasicState> state_;
  std::vector<std::size_t> head_;
  std::vector<double> binv_;
  std::vector<double> y_;
  std::vector<std::size_t> cb_nz_;
  std::vector<double> pivot_row_;
  std::vector<std::size_t> alpha_nz_;
  double dual_tol_ = 1e-9;
  double feas_tol_ = 1e-9;
  std::size_t max_iters_ = 0;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  bool bland_ = false;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  check_problem(problem);
  if (!(options.tol > 0.0)) throw Error(ErrorCode::invalid_input, "lp: tol must be positive");
  Simplex simplex(problem, options);
  return simplex.run();
}

}  // namespace vpp::lp
