#pragma once

// Second-stage operation for fixed investments. Each period is a continuous
// knapsack, solved in closed form by merit order.

#include <cstddef>
#include <vector>

#include "vpp/matrix.hpp"
#include "vpp/model.hpp"

namespace vpp {

struct PeriodDispatch {
  std::vector<double> gen;  // |G|, MW
  double unserved = 0.0;    // MWh
  double cost = 0.0;
};

/// Minimizer of the single-period operating cost at capacities `capacity`.
PeriodDispatch dispatch_period(const ProblemInstance& instance, const std::vector<double>& capacity,
                               std::size_t t);

struct DispatchResult {
  Matrix gen;                    // |G| x |T|, MW
  std::vector<double> unserved;  // |T|, MWh
  double operational_cost = 0.0;
};

DispatchResult dispatch_all(const ProblemInstance& instance, const std::vector<double>& capacity);

struct UpperBound {
  double value = 0.0;  // full objective of the dispatched solution
  FullSolution solution;
  double operational_cost = 0.0;
};

/// Dispatches every period for the plan and evaluates the full objective.
/// Throws Error(invalid_input) if the plan breaks its capacity limits.
UpperBound compute_upper_bound(const ProblemInstance& instance, const InvestmentPlan& plan);

/// Same construction over representative periods.
AggregatedSolution dispatch_aggregated(const AggregatedInstance& agg, const InvestmentPlan& plan);

}  // namespace vpp
