#include "vpp/dispatch.hpp"

#include <string>

#include "vpp/error.hpp"
#include "vpp/kernels.hpp"

namespace vpp {

namespace {

void require_plan(const std::vector<GeneratorSpec>& generators, const InvestmentPlan& plan) {
  if (plan.capacity.size() != generators.size() || plan.built.size() != generators.size()) {
    throw Error(ErrorCode::dimension_mismatch, "plan length differs from |G|");
  }
  const auto report = check_plan(generators, plan);
  if (!report.empty()) {
    throw Error(ErrorCode::invalid_input, "plan violates capacity limits of generator " +
                                              std::to_string(report.front().generator));
  }
}

}  // namespace

PeriodDispatch dispatch_period(const ProblemInstance& instance, const std::vector<double>& capacity,
                               std::size_t t) {
  if (t >= instance.horizon) throw Error(ErrorCode::invalid_input, "period index out of range");
  if (capacity.size() != instance.generator_count()) {
    throw Error(ErrorCode::dimension_mismatch, "capacity vector length differs from |G|");
  }
  // One-period view keeps the arithmetic identical to the batched kernel.
  kernels::PeriodData d;
  d.generators = instance.generator_count();
  d.periods = 1;
  d.delta = instance.delta;
  d.ns_cost = instance.ns_cost;
  for (const auto& g : instance.generators) d.op_cost.push_back(g.op_cost);
  d.weight = {1.0};
  d.demand = {instance.demand[t]};
  d.cap_factor = Matrix(d.generators, 1);
  for (std::size_t g = 0; g < d.generators; ++g) d.cap_factor(g, 0) = instance.cap_factor(g, t);
  d.merit_order = kernels::merit_order(instance.generators, instance.ns_cost);
  kernels::DispatchBuffers buf;
  kernels::dispatch_serial(d, capacity, buf);
  PeriodDispatch out;
  out.gen.resize(d.generators);
  for (std::size_t g = 0; g < d.generators; ++g) out.gen[g] = buf.gen(g, 0);
  out.unserved = buf.unserved[0];
  out.cost = buf.period_cost[0];
  return out;
}

DispatchResult dispatch_all(const ProblemInstance& instance, const std::vector<double>& capacity) {
  const auto data = kernels::make_period_data(instance);
  kernels::DispatchBuffers buf;
  kernels::dispatch_parallel(data, capacity, buf);
  DispatchResult out;
  out.gen = std::move(buf.gen);
  out.unserved = std::move(buf.unserved);
  for (double c : buf.period_cost) out.operational_cost += c;
  return out;
}

UpperBound compute_upper_bound(const ProblemInstance& instance, const InvestmentPlan& plan) {
  require_plan(instance.generators, plan);
  DispatchResult d = dispatch_all(instance, plan.capacity);
  UpperBound ub;
  ub.operational_cost = d.operational_cost;
  ub.solution.plan = plan;
  ub.solution.gen = std::move(d.gen);
  ub.solution.unserved = std::move(d.unserved);
  ub.value = evaluate_full_objective(instance, ub.solution);
  return ub;
}

AggregatedSolution dispatch_aggregated(const AggregatedInstance& agg, const InvestmentPlan& plan) {
  require_plan(agg.generators, plan);
  const auto data = kernels::make_period_data(agg);
  kernels::DispatchBuffers buf;
  kernels::dispatch_parallel(data, plan.capacity, buf);
  AggregatedSolution sol;
  sol.plan = plan;
  sol.gen = std::move(buf.gen);
  sol.unserved = std::move(buf.unserved);
  return sol;
}

}  // namespace vpp
