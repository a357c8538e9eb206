#include "vpp/tsa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vpp/dispatch.hpp"
#include "vpp/error.hpp"

namespace vpp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Bounds closer than this (relative) are treated as equal; the aggregated
// bound and the dispatched cost are computed along different arithmetic paths.
constexpr double kBoundSlack = 1e-9;

}  // namespace

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::gap_met: return "gap_met";
    case Termination::iter_limit: return "iter_limit";
    case Termination::k_saturated: return "k_saturated";
  }
  return "unknown";
}

void validate(const AlgoConfig& c) {
  if (c.k0 < 1) throw Error(ErrorCode::invalid_input, "k0 must be at least 1");
  if (c.alpha < 1) throw Error(ErrorCode::invalid_input, "alpha must be at least 1");
  if (!(c.eps_threshold > 0.0 && c.eps_threshold < 1.0)) {
    throw Error(ErrorCode::invalid_input, "eps_threshold must lie in (0, 1)");
  }
  if (c.max_iters < 1) throw Error(ErrorCode::invalid_input, "max_iters must be at least 1");
  if (c.cluster_opts.restarts < 1) throw Error(ErrorCode::invalid_input, "restarts must be at least 1");
  if (c.cluster_opts.max_iter < 1) {
    throw Error(ErrorCode::invalid_input, "cluster max_iter must be at least 1");
  }
  validate(c.milp_opts);
}

double optimality_gap(double ub, double lb) {
  if (!(ub > 0.0)) {
    throw Error(ErrorCode::degenerate, "optimality gap undefined for a non-positive upper bound");
  }
  if (lb > ub) throw Error(ErrorCode::invalid_input, "lower bound exceeds upper bound");
  return (ub - lb) / ub;
}

std::size_t update_cluster_count(std::size_t k, std::size_t alpha, double gap,
                                 std::size_t horizon) {
  const double step = std::floor(static_cast<double>(alpha) * std::max(0.0, gap));
  const std::size_t inc = std::max<std::size_t>(1, static_cast<std::size_t>(step));
  return std::min(horizon, k + inc);
}

BoundsTrace run_tsa(const ProblemInstance& instance, const AlgoConfig& config,
                    const IterationObserver& observer) {
  validate(config);
  validate(instance);
  const std::size_t T = instance.horizon;
  if (config.k0 > T) {
    throw Error(ErrorCode::invalid_input, "k0 exceeds the horizon (" + std::to_string(T) + ")");
  }
  const FeatureMatrix features = build_features(instance, config.scaling, config.features);

  BoundsTrace trace;
  std::size_t k = config.k0;
  double lb = 0.0;
  double ub = 0.0;
  for (std::size_t i = 0;; ++i) {
    IterationRecord rec;
    rec.iter = i;
    rec.k_used = k;

    auto t0 = Clock::now();
    const Partition part = cluster(features, k, config.method, config.seed + i, config.cluster_opts);
    rec.cluster_time = seconds_since(t0);

    t0 = Clock::now();
    const AggregatedInstance agg = build_aggregated_instance(instance, part);
    const AggregatedMilpResult res = solve_aggregated(agg, config.milp_opts);
    rec.agg_solve_time = seconds_since(t0);
    rec.lb_candidate = res.proven_bound;

    t0 = Clock::now();
    UpperBound cand = compute_upper_bound(instance, res.incumbent_plan);
    rec.dispatch_time = seconds_since(t0);
    rec.ub_candidate = cand.value;

    if (i == 0 || cand.value < ub) {
      ub = cand.value;
      trace.best_plan = res.incumbent_plan;
      trace.best_solution = std::move(cand.solution);
    }
    lb = i == 0 ? rec.lb_candidate : std::max(lb, rec.lb_candidate);
    if (lb > ub) {
      if (lb - ub > kBoundSlack * std::max(1.0, std::abs(ub))) {
        throw Error(ErrorCode::solver_failure, "lower bound exceeds upper bound at iteration " +
                                                   std::to_string(i));
      }
      lb = ub;
    }
    rec.lb = lb;
    rec.ub = ub;
    if (ub > 0.0) {
      rec.gap = optimality_gap(ub, lb);
    } else if (ub - lb <= kBoundSlack) {
      rec.gap = 0.0;  // nothing to pay for; both bounds are zero
    } else {
      throw Error(ErrorCode::degenerate, "non-positive upper bound with a lower bound below it");
    }
    trace.records.push_back(rec);
    trace.final_lb = lb;
    trace.final_ub = ub;
    if (observer) observer(rec, trace);

    if (rec.gap <= config.eps_threshold) {
      trace.termination = Termination::gap_met;
      break;
    }
    if (k == T) {
      trace.termination = Termination::k_saturated;
      break;
    }
    if (i + 1 > config.max_iters) {
      trace.termination = Termination::iter_limit;
      break;
    }
    k = update_cluster_count(k, config.alpha, rec.gap, T);
  }
  return trace;
}

}  // namespace vpp
