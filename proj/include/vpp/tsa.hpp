#pragma once

// Iterative time-series aggregation with certified bounds. Each iteration
// clusters the periods, solves the aggregated model for a lower bound, and
// dispatches the aggregated plan over the full horizon for an upper bound.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vpp/clustering.hpp"
#include "vpp/milp.hpp"
#include "vpp/model.hpp"

namespace vpp {

struct AlgoConfig {
  std::size_t k0 = 5;
  std::size_t alpha = 100;
  double eps_threshold = 0.01;
  std::size_t max_iters = 1000;  // iterations i = 0..max_iters
  ClusterMethod method = ClusterMethod::kmeans;
  std::uint64_t seed = 0;
  MilpOptions milp_opts;
  Scaling scaling = Scaling::minmax;
  FeatureSet features = FeatureSet::net_load;
  ClusterOptions cluster_opts;
};

/// Throws Error(invalid_input) naming the offending field.
void validate(const AlgoConfig& config);

struct IterationRecord {
  std::size_t iter = 0;
  std::size_t k_used = 0;
  double lb_candidate = 0.0;
  double ub_candidate = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  double gap = 0.0;
  double cluster_time = 0.0;
  double agg_solve_time = 0.0;
  double dispatch_time = 0.0;
};

enum class Termination { gap_met, iter_limit, k_saturated };

const char* to_string(Termination termination);

struct BoundsTrace {
  std::vector<IterationRecord> records;
  double final_lb = 0.0;
  double final_ub = 0.0;
  InvestmentPlan best_plan;
  FullSolution best_solution;
  Termination termination = Termination::iter_limit;
};

/// (ub - lb) / ub. Throws Error(degenerate) when ub <= 0 and
/// Error(invalid_input) when lb > ub.
double optimality_gap(double ub, double lb);

/// min(horizon, k + max(1, floor(alpha * gap))).
std::size_t update_cluster_count(std::size_t k, std::size_t alpha, double gap, std::size_t horizon);

/// Called after every iteration with the record just appended and the trace
/// as it stands (best plan and solution included).
using IterationObserver = std::function<void(const IterationRecord&, const BoundsTrace&)>;

BoundsTrace run_tsa(const ProblemInstance& instance, const AlgoConfig& config,
                    const IterationObserver& observer = {});

}  // namespace vpp
