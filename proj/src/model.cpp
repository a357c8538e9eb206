#include "vpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "vpp/error.hpp"

namespace vpp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::empty_cluster: return "empty_cluster";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::solver_failure: return "solver_failure";
  }
  return "unknown";
}

const char* to_string(GeneratorKind kind) {
  return kind == GeneratorKind::thermal ? "thermal" : "renewable";
}

GeneratorKind parse_generator_kind(const std::string& text) {
  if (text == "thermal") return GeneratorKind::thermal;
  if (text == "renewable") return GeneratorKind::renewable;
  throw Error(ErrorCode::parse_error, "unknown generator kind '" + text + "'");
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::power_balance: return "power_balance";
    case ConstraintKind::generation_lower: return "generation_lower";
    case ConstraintKind::generation_upper: return "generation_upper";
    case ConstraintKind::unserved_lower: return "unserved_lower";
    case ConstraintKind::capacity_lower: return "capacity_lower";
    case ConstraintKind::capacity_upper: return "capacity_upper";
    case ConstraintKind::binary_domain: return "binary_domain";
  }
  return "unknown";
}

namespace {

[[noreturn]] void dimension_error(const std::string& what) {
  throw Error(ErrorCode::dimension_mismatch, what);
}

void require_finite(double value, const std::string& what) {
  if (!std::isfinite(value)) throw Error(ErrorCode::invalid_input, what + " is not finite");
}

}  // namespace

std::vector<std::string> validate(const ProblemInstance& instance) {
  const std::size_t n_gen = instance.generators.size();
  const std::size_t horizon = instance.horizon;
  if (horizon == 0) throw Error(ErrorCode::invalid_input, "horizon must be at least 1");
  if (instance.demand.size() != horizon) dimension_error("demand length differs from horizon");
  if (instance.cap_factor.rows() != n_gen || instance.cap_factor.cols() != horizon) {
    dimension_error("capacity factor matrix is not |G| x |T|");
  }
  if (!(instance.delta > 0.0) || !std::isfinite(instance.delta)) {
    throw Error(ErrorCode::invalid_input, "delta must be positive");
  }
  require_finite(instance.ns_cost, "ns_cost");
  if (instance.ns_cost < 0.0) throw Error(ErrorCode::invalid_input, "ns_cost must be nonnegative");

  double max_op = 0.0;
  for (std::size_t g = 0; g < n_gen; ++g) {
    const GeneratorSpec& spec = instance.generators[g];
    const std::string name = "generator " + std::to_string(g);
    require_finite(spec.inv_cost, name + " inv_cost");
    require_finite(spec.op_cost, name + " op_cost");
    require_finite(spec.cap_min, name + " cap_min");
    require_finite(spec.cap_max, name + " cap_max");
    if (spec.inv_cost < 0.0 || spec.op_cost < 0.0) {
      throw Error(ErrorCode::invalid_input, name + " has a negative cost");
    }
    if (spec.cap_min < 0.0 || spec.cap_min > spec.cap_max) {
      throw Error(ErrorCode::invalid_input, name + " violates 0 <= cap_min <= cap_max");
    }
    max_op = std::max(max_op, spec.op_cost);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double f = instance.cap_factor(g, t);
      if (!(f >= 0.0 && f <= 1.0)) {
        std::ostringstream msg;
        msg << "capacity factor F[" << g << "," << t << "] = " << f << " outside [0, 1]";
        throw Error(ErrorCode::invalid_input, msg.str());
      }
    }
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    const double d = instance.demand[t];
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::invalid_input, "demand D[" + std::to_string(t) + "] is negative or not finite");
    }
  }

  std::vector<std::string> warnings;
  if (n_gen > 0 && !(instance.ns_cost > max_op)) {
    warnings.emplace_back("ns_cost does not exceed the largest operational cost");
  }
  return warnings;
}

Partition make_partition(std::vector<std::size_t> assignment, std::size_t k_count) {
  Partition part;
  part.k_count = k_count;
  part.members.assign(k_count, {});
  for (std::size_t t = 0; t < assignment.size(); ++t) {
    if (assignment[t] >= k_count) {
      throw Error(ErrorCode::invalid_input,
                  "period " + std::to_string(t) + " assigned to cluster out of range");
    }
    part.members[assignment[t]].push_back(t);
  }
  part.sizes.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) part.sizes[k] = part.members[k].size();
  part.assignment = std::move(assignment);
  return part;
}

Partition singleton_partition(std::size_t horizon) {
  std::vector<std::size_t> assignment(horizon);
  for (std::size_t t = 0; t < horizon; ++t) assignment[t] = t;
  return make_partition(std::move(assignment), horizon);
}

Partition single_cluster_partition(std::size_t horizon) {
  return make_partition(std::vector<std::size_t>(horizon, 0), 1);
}

void validate(const Partition& part, std::size_t horizon) {
  if (part.assignment.size() != horizon) dimension_error("partition does not cover the horizon");
  if (part.k_count < 1 || part.k_count > horizon) {
    throw Error(ErrorCode::invalid_input, "partition must have 1 <= K <= |T|");
  }
  if (part.members.size() != part.k_count || part.sizes.size() != part.k_count) {
    dimension_error("partition member lists inconsistent with k_count");
  }
  std::vector<char> seen(horizon, 0);
  for (std::size_t k = 0; k < part.k_count; ++k) {
    if (part.members[k].empty()) {
      throw Error(ErrorCode::empty_cluster, "cluster " + std::to_string(k) + " is empty");
    }
    if (part.sizes[k] != part.members[k].size()) {
      throw Error(ErrorCode::invalid_input, "size of cluster " + std::to_string(k) + " is stale");
    }
    for (std::size_t t : part.members[k]) {
      if (t >= horizon || seen[t] || part.assignment[t] != k) {
        throw Error(ErrorCode::invalid_input, "partition members are not a disjoint cover");
      }
      seen[t] = 1;
    }
  }
}

InvestmentPlan empty_plan(std::size_t generator_count) {
  return {std::vector<double>(generator_count, 0.0), std::vector<int>(generator_count, 0)};
}

InvestmentPlan plan_from_capacity(std::vector<double> capacity) {
  InvestmentPlan plan;
  plan.built.resize(capacity.size());
  for (std::size_t g = 0; g < capacity.size(); ++g) plan.built[g] = capacity[g] > 0.0 ? 1 : 0;
  plan.capacity = std::move(capacity);
  return plan;
}

namespace {

template <class Sol>
void check_solution_shape(const Sol& sol, std::size_t n_gen, std::size_t n_periods) {
  if (sol.plan.capacity.size() != n_gen || sol.plan.built.size() != n_gen) {
    dimension_error("investment plan length differs from |G|");
  }
  if (sol.gen.rows() != n_gen || sol.gen.cols() != n_periods) {
    dimension_error("generation matrix has wrong shape");
  }
  if (sol.unserved.size() != n_periods) dimension_error("unserved vector has wrong length");
}

double investment_cost(const std::vector<GeneratorSpec>& gens, const InvestmentPlan& plan) {
  double total = 0.0;
  for (std::size_t g = 0; g < gens.size(); ++g) total += gens[g].inv_cost * plan.capacity[g];
  return total;
}

}  // namespace

double evaluate_full_objective(const ProblemInstance& instance, const FullSolution& sol) {
  const std::size_t n_gen = instance.generators.size();
  check_solution_shape(sol, n_gen, instance.horizon);
  double total = investment_cost(instance.generators, sol.plan);
  for (std::size_t t = 0; t < instance.horizon; ++t) {
    double period = 0.0;
    for (std::size_t g = 0; g < n_gen; ++g) {
      period += instance.generators[g].op_cost * sol.gen(g, t) * instance.delta;
    }
    total += period + instance.ns_cost * sol.unserved[t];
  }
  return total;
}

double evaluate_aggregated_objective(const AggregatedInstance& agg, const AggregatedSolution& sol) {
  const std::size_t n_gen = agg.generators.size();
  check_solution_shape(sol, n_gen, agg.k_count);
  if (agg.weights.size() != agg.k_count) dimension_error("aggregated weights length differs from K");
  double total = investment_cost(agg.generators, sol.plan);
  for (std::size_t k = 0; k < agg.k_count; ++k) {
    double period = 0.0;
    for (std::size_t g = 0; g < n_gen; ++g) {
      period += agg.generators[g].op_cost * sol.gen(g, k) * agg.delta;
    }
    total += agg.weights[k] * (period + agg.ns_cost * sol.unserved[k]);
  }
  return total;
}

AggregatedInstance build_aggregated_instance(const ProblemInstance& instance, const Partition& part) {
  validate(part, instance.horizon);
  const std::size_t n_gen = instance.generators.size();
  AggregatedInstance agg;
  agg.generators = instance.generators;
  agg.delta = instance.delta;
  agg.ns_cost = instance.ns_cost;
  agg.k_count = part.k_count;
  agg.weights.resize(part.k_count);
  agg.avg_demand.resize(part.k_count);
  agg.avg_cap_factor = Matrix(n_gen, part.k_count);
  for (std::size_t k = 0; k < part.k_count; ++k) {
    const auto& members = part.members[k];
    const double size = static_cast<double>(members.size());
    agg.weights[k] = size;
    double demand = 0.0;
    for (std::size_t t : members) demand += instance.demand[t];
    agg.avg_demand[k] = demand / size;
    for (std::size_t g = 0; g < n_gen; ++g) {
      double f = 0.0;
      for (std::size_t t : members) f += instance.cap_factor(g, t);
      agg.avg_cap_factor(g, k) = f / size;
    }
  }
  return agg;
}

AggregatedSolution map_full_to_aggregated(const FullSolution& sol, const Partition& part) {
  const std::size_t n_gen = sol.plan.capacity.size();
  check_solution_shape(sol, n_gen, part.horizon());
  validate(part, part.horizon());
  AggregatedSolution out;
  out.plan = sol.plan;
  out.gen = Matrix(n_gen, part.k_count);
  out.unserved.resize(part.k_count);
  for (std::size_t k = 0; k < part.k_count; ++k) {
    const auto& members = part.members[k];
    const double size = static_cast<double>(members.size());
    for (std::size_t g = 0; g < n_gen; ++g) {
      double p = 0.0;
      for (std::size_t t : members) p += sol.gen(g, t);
      out.gen(g, k) = p / size;
    }
    double d = 0.0;
    for (std::size_t t : members) d += sol.unserved[t];
    out.unserved[k] = d / size;
  }
  return out;
}

namespace {

void sort_report(ViolationReport& report) {
  std::sort(report.begin(), report.end(), [](const Violation& a, const Violation& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return std::tie(a.kind, a.generator, a.period) < std::tie(b.kind, b.generator, b.period);
  });
}

void check_plan_into(const std::vector<GeneratorSpec>& gens, const InvestmentPlan& plan, double tol,
                     ViolationReport& report) {
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const int b = plan.built[g];
    if (b != 0 && b != 1) {
      report.push_back({ConstraintKind::binary_domain, g, kNoIndex, 1.0});
      continue;
    }
    const double x = plan.capacity[g];
    const double lower = b * gens[g].cap_min;
    const double upper = b * gens[g].cap_max;
    if (x < lower - tol) report.push_back({ConstraintKind::capacity_lower, g, kNoIndex, lower - x});
    if (x > upper + tol) report.push_back({ConstraintKind::capacity_upper, g, kNoIndex, x - upper});
  }
}

// Shared row checks for the full model and the aggregated model; only the
// data arrays differ.
template <class Sol>
ViolationReport check_operational(const std::vector<GeneratorSpec>& gens, double delta,
                                  const Matrix& cap_factor, const std::vector<double>& demand,
                                  const Sol& sol, double tol) {
  const std::size_t n_gen = gens.size();
  const std::size_t n_periods = demand.size();
  check_solution_shape(sol, n_gen, n_periods);
  ViolationReport report;
  check_plan_into(gens, sol.plan, tol, report);
  for (std::size_t t = 0; t < n_periods; ++t) {
    double supplied = 0.0;
    for (std::size_t g = 0; g < n_gen; ++g) {
      const double p = sol.gen(g, t);
      supplied += p * delta;
      if (p < -tol) report.push_back({ConstraintKind::generation_lower, g, t, -p});
      const double limit = cap_factor(g, t) * sol.plan.capacity[g];
      if (p > limit + tol) report.push_back({ConstraintKind::generation_upper, g, t, p - limit});
    }
    const double d = sol.unserved[t];
    if (d < -tol) report.push_back({ConstraintKind::unserved_lower, kNoIndex, t, -d});
    const double residual = std::abs(supplied + d - demand[t]);
    if (residual > tol) report.push_back({ConstraintKind::power_balance, kNoIndex, t, residual});
  }
  sort_report(report);
  return report;
}

}  // namespace

ViolationReport check_feasibility(const ProblemInstance& instance, const FullSolution& sol, double tol) {
  return check_operational(instance.generators, instance.delta, instance.cap_factor, instance.demand,
                           sol, tol);
}

ViolationReport check_feasibility(const AggregatedInstance& agg, const AggregatedSolution& sol,
                                  double tol) {
  return check_operational(agg.generators, agg.delta, agg.avg_cap_factor, agg.avg_demand, sol, tol);
}

ViolationReport check_plan(const std::vector<GeneratorSpec>& generators, const InvestmentPlan& plan,
                           double tol) {
  if (plan.capacity.size() != generators.size() || plan.built.size() != generators.size()) {
    dimension_error("investment plan length differs from |G|");
  }
  ViolationReport report;
  check_plan_into(generators, plan, tol, report);
  sort_report(report);
  return report;
}

}  // namespace vpp
