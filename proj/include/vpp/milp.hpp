#pragma once

// Branch-and-bound over the semi-continuous capacities x_g in {0} u [lo, hi].
// A node only carries bounds l <= x <= u; its relaxation
//
//   min  c'x + sum_k w_k Q_k(x)   over the box
//
// is convex piecewise linear (Q_k is the period operating cost) and is solved
// by Kelley cutting planes: the master LP over (x, theta) is solved with the
// in-house simplex, and every evaluation of Q returns an exact supporting cut.
// Node bounds come from a Lagrangian certificate built from the master duals,
// so they stay valid when the master is solved only to tolerance.

#include <cstddef>
#include <string>

#include "vpp/model.hpp"

namespace vpp {

enum class MilpStatus { proved_optimal, gap_limit, node_limit, infeasible };
enum class Branching { most_violated, lowest_index };
enum class Search { best_bound, depth_first };

const char* to_string(MilpStatus status);
const char* to_string(Branching branching);
const char* to_string(Search search);
Branching parse_branching(const std::string& text);
Search parse_search(const std::string& text);

struct MilpOptions {
  double mip_tol = 1e-6;
  std::size_t node_limit = 100000;
  double lp_tol = 1e-8;
  Branching branching = Branching::most_violated;
  Search search = Search::best_bound;
  std::size_t max_cut_rounds = 400;  // per node
};

/// Throws Error(invalid_input) unless mip_tol > 0, lp_tol > 0, node_limit >= 1.
void validate(const MilpOptions& opts);

struct MilpStats {
  MilpStatus status = MilpStatus::node_limit;
  double incumbent_value = 0.0;
  double proven_bound = 0.0;
  double root_bound = 0.0;  // certified bound of the root relaxation
  std::size_t nodes_explored = 0;
  std::size_t cut_rounds = 0;
  double wall_time = 0.0;
};

template <class Solution>
struct MilpResult : MilpStats {
  InvestmentPlan incumbent_plan;
  Solution incumbent_solution;
};

using FullMilpResult = MilpResult<FullSolution>;
using AggregatedMilpResult = MilpResult<AggregatedSolution>;

FullMilpResult solve_full_scale(const ProblemInstance& instance, const MilpOptions& opts = {});
AggregatedMilpResult solve_aggregated(const AggregatedInstance& agg, const MilpOptions& opts = {});

/// Relative gap used by the tree: (incumbent - bound) / max(1, |incumbent|).
double relative_gap(double incumbent, double bound);

}  // namespace vpp
