#pragma once

// Bounded-variable primal simplex for small dense-ish linear programs.
//
//   min  c'x   s.t.  row_i(x) {<=,=,>=} rhs_i,   lower <= x <= upper
//
// Each row gets a logical variable r_i = a_i'x whose bounds encode the sense,
// so the working system is A x - r = 0 with every variable boxed. The basis
// inverse is kept explicitly and refactorized every `refactor_interval`
// pivots. Phase 1 minimizes the sum of bound violations with a long-step
// ratio test; phase 2 uses Dantzig pricing and falls back to Bland's rule
// after a run of degenerate pivots.

#include <cstddef>
#include <limits>
#include <vector>

namespace vpp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { less_equal, equal, greater_equal };

struct Row {
  std::vector<std::size_t> index;
  std::vector<double> value;
  RowSense sense = RowSense::less_equal;
  double rhs = 0.0;
};

struct LpProblem {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  std::size_t add_column(double cost, double lo, double hi);
  std::size_t add_row(std::vector<std::size_t> index, std::vector<double> value, RowSense sense,
                      double rhs);
  std::size_t column_count() const noexcept { return objective.size(); }
  std::size_t row_count() const noexcept { return rows.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> primal;         // one per column
  std::vector<double> dual;           // one per row; reduced cost d = c - A'y
  std::vector<double> reduced_cost;   // one per column
  std::vector<double> row_activity;   // a_i'x
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

struct LpOptions {
  double tol = 1e-8;
  std::size_t max_iters = 0;  // 0 selects 50 * (rows + cols)
  std::size_t refactor_interval = 64;
  std::size_t stall_threshold = 50;
};

/// Throws Error(invalid_input) for malformed problems (inconsistent sizes,
/// lower > upper, NaN data). Infeasibility and unboundedness are reported
/// through the status, never thrown.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace vpp::lp
