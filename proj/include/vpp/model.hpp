#pragma once

// Domain types of the investment planning problem and the pure functions that
// relate the full-scale model to its cluster-aggregated counterpart.

#include <cstddef>
#include <string>
#include <vector>

#include "vpp/matrix.hpp"

namespace vpp {

/// Absolute per-row tolerance used when checking constraint satisfaction.
inline constexpr double kFeasibilityTol = 1e-7;

enum class GeneratorKind { thermal, renewable };

const char* to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& text);

struct GeneratorSpec {
  std::size_t id = 0;
  GeneratorKind kind = GeneratorKind::renewable;
  double inv_cost = 0.0;  // EUR per MW installed
  double op_cost = 0.0;   // EUR per MWh generated
  double cap_min = 0.0;   // MW, lower limit when built
  double cap_max = 0.0;   // MW, upper limit when built

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

struct ProblemInstance {
  std::vector<GeneratorSpec> generators;
  std::size_t horizon = 0;
  double delta = 1.0;    // hours per period
  double ns_cost = 0.0;  // EUR per MWh of non-supplied energy
  Matrix cap_factor;     // |G| x |T|, dimensionless in [0, 1]
  std::vector<double> demand;  // |T|, MWh per period

  std::size_t generator_count() const noexcept { return generators.size(); }
};

/// Throws Error(invalid_input) for hard violations; returns soft warnings
/// (currently only the ns_cost <= max op_cost sanity flag).
std::vector<std::string> validate(const ProblemInstance& instance);

/// Assignment of periods to clusters. members[k] lists the periods of cluster
/// k in ascending order; sizes[k] == members[k].size().
struct Partition {
  std::size_t k_count = 0;
  std::vector<std::size_t> assignment;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> sizes;

  std::size_t horizon() const noexcept { return assignment.size(); }
};

/// Builds members and sizes from an assignment vector. Does not reject empty
/// clusters; consumers call validate(Partition) for that.
Partition make_partition(std::vector<std::size_t> assignment, std::size_t k_count);
Partition singleton_partition(std::size_t horizon);
Partition single_cluster_partition(std::size_t horizon);

/// Throws Error(empty_cluster) or Error(invalid_input) when the partition is
/// not a disjoint nonempty cover of {0..horizon-1}.
void validate(const Partition& part, std::size_t horizon);

struct AggregatedInstance {
  std::vector<GeneratorSpec> generators;
  double delta = 1.0;
  double ns_cost = 0.0;
  std::size_t k_count = 0;
  std::vector<double> weights;     // T_k
  std::vector<double> avg_demand;  // K
  Matrix avg_cap_factor;           // |G| x K

  std::size_t generator_count() const noexcept { return generators.size(); }
};

struct InvestmentPlan {
  std::vector<double> capacity;  // MW
  std::vector<int> built;        // 0 or 1

  friend bool operator==(const InvestmentPlan&, const InvestmentPlan&) = default;
};

/// Plan with every generator switched off.
InvestmentPlan empty_plan(std::size_t generator_count);

/// Plan whose built flags follow from the capacities (built iff capacity > 0).
InvestmentPlan plan_from_capacity(std::vector<double> capacity);

struct FullSolution {
  InvestmentPlan plan;
  Matrix gen;                   // |G| x |T|, MW
  std::vector<double> unserved; // |T|, MWh
};

struct AggregatedSolution {
  InvestmentPlan plan;
  Matrix gen;                   // |G| x K, MW
  std::vector<double> unserved; // K, MWh
};

double evaluate_full_objective(const ProblemInstance& instance, const FullSolution& sol);
double evaluate_aggregated_objective(const AggregatedInstance& agg, const AggregatedSolution& sol);

AggregatedInstance build_aggregated_instance(const ProblemInstance& instance, const Partition& part);

/// Cluster means of dispatch and shedding; investments copied unchanged.
AggregatedSolution map_full_to_aggregated(const FullSolution& sol, const Partition& part);

enum class ConstraintKind {
  power_balance,
  generation_lower,
  generation_upper,
  unserved_lower,
  capacity_lower,
  capacity_upper,
  binary_domain,
};

const char* to_string(ConstraintKind kind);

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

struct Violation {
  ConstraintKind kind;
  std::size_t generator = kNoIndex;
  std::size_t period = kNoIndex;  // cluster index for aggregated checks
  double magnitude = 0.0;
};

/// Sorted by magnitude descending, ties by (kind, generator, period).
using ViolationReport = std::vector<Violation>;

ViolationReport check_feasibility(const ProblemInstance& instance, const FullSolution& sol,
                                  double tol = kFeasibilityTol);
ViolationReport check_feasibility(const AggregatedInstance& agg, const AggregatedSolution& sol,
                                  double tol = kFeasibilityTol);

/// Investment-only check of the semi-continuous capacity limits.
ViolationReport check_plan(const std::vector<GeneratorSpec>& generators, const InvestmentPlan& plan,
                           double tol = kFeasibilityTol);

}  // namespace vpp
