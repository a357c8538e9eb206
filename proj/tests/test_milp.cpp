#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "vpp/error.hpp"
#include "vpp/kernels.hpp"
#include "vpp/milp.hpp"

using namespace vpp;

namespace {

bool close(double a, double b, double rel = 1e-6) {
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
}

// Wide minimum capacities make the semi-continuity bite, so the tree branches.
ProblemInstance branching_instance(std::size_t G, std::size_t T, std::uint64_t seed) {
  ProblemInstance inst = oracle::random_instance(G, T, seed);
  Rng rng(seed + 100);
  for (auto& g : inst.generators) {
    g.cap_min = rng.uniform(0.5, 0.9);
    g.cap_max = g.cap_min + rng.uniform(0.2, 1.0);
    g.inv_cost = rng.uniform(300.0, 3000.0) * static_cast<double>(T);
  }
  return inst;
}

void check_invariants(const ProblemInstance& inst, const FullMilpResult& r, const MilpOptions& o) {
  CHECK(r.proven_bound <= r.incumbent_value + 1e-9 * std::max(1.0, r.incumbent_value));
  CHECK(r.root_bound <= r.proven_bound + 1e-9 * std::max(1.0, r.proven_bound));
  if (r.status == MilpStatus::proved_optimal) {
    CHECK(r.incumbent_value - r.proven_bound <= o.mip_tol * std::max(1.0, std::abs(r.incumbent_value)));
  }
  for (std::size_t g = 0; g < inst.generator_count(); ++g) {
    const double x = r.incumbent_plan.capacity[g];
    const auto& s = inst.generators[g];
    CHECK((x == 0.0 || (x >= s.cap_min - 1e-9 && x <= s.cap_max + 1e-9)));
  }
  CHECK(check_feasibility(inst, r.incumbent_solution).empty());
  CHECK(evaluate_full_objective(inst, r.incumbent_solution) ==
        doctest::Approx(r.incumbent_value).epsilon(1e-12));
}

}  // namespace

TEST_CASE("zero demand builds nothing") {
  ProblemInstance inst = oracle::random_instance(5, 12, 1);
  std::fill(inst.demand.begin(), inst.demand.end(), 0.0);
  const auto r = solve_full_scale(inst);
  CHECK(r.status == MilpStatus::proved_optimal);
  CHECK(r.incumbent_value == 0.0);
  for (int b : r.incumbent_plan.built) CHECK(b == 0);
}

TEST_CASE("one renewable unit too dear to build") {
  ProblemInstance inst;
  inst.generators = {{0, GeneratorKind::renewable, 30000.0, 3.0, 0.1, 1.0}};
  inst.horizon = 1;
  inst.ns_cost = 5000.0;
  inst.cap_factor = Matrix(1, 1, 1.0);
  inst.demand = {0.5};
  const auto r = solve_full_scale(inst);
  CHECK(r.status == MilpStatus::proved_optimal);
  CHECK(r.incumbent_value == doctest::Approx(2500.0));
  CHECK(r.incumbent_plan.capacity[0] == 0.0);
  CHECK(oracle::enumerate(inst).value == doctest::Approx(2500.0));
}

TEST_CASE("matches enumeration on paper-style instances") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ProblemInstance inst = oracle::random_instance(8, 96, seed);
    const auto truth = oracle::enumerate(inst);
    const MilpOptions o;
    const auto r = solve_full_scale(inst, o);
    CHECK(r.status == MilpStatus::proved_optimal);
    CHECK(close(r.incumbent_value, truth.value));
    check_invariants(inst, r, o);
  }
}

TEST_CASE("every branching and search option reaches the enumerated optimum") {
  bool branched = false;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ProblemInstance inst = branching_instance(6, 24, seed);
    const auto truth = oracle::enumerate(inst);
    for (Branching b : {Branching::most_violated, Branching::lowest_index}) {
      for (Search s : {Search::best_bound, Search::depth_first}) {
        MilpOptions o;
        o.branching = b;
        o.search = s;
        const auto r = solve_full_scale(inst, o);
        CAPTURE(seed);
        CHECK(r.status == MilpStatus::proved_optimal);
        CHECK(close(r.incumbent_value, truth.value));
        check_invariants(inst, r, o);
        branched |= r.nodes_explored > 1;
      }
    }
  }
  CHECK(branched);
}

TEST_CASE("node limit keeps a valid bound") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ProblemInstance inst = branching_instance(7, 24, seed);
    const auto truth = oracle::enumerate(inst);
    MilpOptions o;
    o.node_limit = 1;
    const auto r = solve_full_scale(inst, o);
    CHECK(r.proven_bound <= truth.value * (1 + 1e-9));
    CHECK(r.incumbent_value >= truth.value * (1 - 1e-9));
    if (r.status != MilpStatus::proved_optimal) CHECK(r.status == MilpStatus::node_limit);
    check_invariants(inst, r, o);
  }
}

TEST_CASE("singleton aggregation equals the full-scale solve") {
  const ProblemInstance inst = oracle::random_instance(6, 40, 7);
  const auto full = solve_full_scale(inst);
  const auto agg = solve_aggregated(build_aggregated_instance(inst, singleton_partition(40)));
  CHECK(close(agg.incumbent_value, full.incumbent_value));
}

TEST_CASE("one cluster equals a hand-built single-period model") {
  const ProblemInstance inst = oracle::random_instance(5, 30, 4);
  const auto agg = solve_aggregated(build_aggregated_instance(inst, single_cluster_partition(30)));

  // One period carrying the mean data; investment spread over the 30 periods.
  ProblemInstance one;
  one.horizon = 1;
  one.ns_cost = inst.ns_cost;
  one.generators = inst.generators;
  for (auto& g : one.generators) g.inv_cost /= 30.0;
  one.cap_factor = Matrix(5, 1, 0.0);
  double d = 0.0;
  for (std::size_t t = 0; t < 30; ++t) {
    d += inst.demand[t] / 30.0;
    for (std::size_t g = 0; g < 5; ++g) one.cap_factor(g, 0) += inst.cap_factor(g, t) / 30.0;
  }
  one.demand = {d};
  const double hand = 30.0 * oracle::enumerate(one).value;
  CHECK(close(agg.incumbent_value, hand));
}

TEST_CASE("aggregated bounds sit below the full optimum and grow under refinement") {
  const ProblemInstance inst = oracle::random_instance(8, 96, 5);
  const double star = oracle::enumerate(inst).value;
  Rng rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const Partition coarse = oracle::random_partition(96, 4, rng);
    // refine by splitting every cluster on period parity
    std::vector<std::size_t> fine_label(96);
    for (std::size_t t = 0; t < 96; ++t) fine_label[t] = 2 * coarse.assignment[t] + (t % 2);
    std::vector<std::size_t> remap(8, kNoIndex);
    std::size_t used = 0;
    for (auto& l : fine_label) {
      if (remap[l] == kNoIndex) remap[l] = used++;
      l = remap[l];
    }
    const Partition fine = make_partition(fine_label, used);
    const auto a = solve_aggregated(build_aggregated_instance(inst, coarse));
    const auto b = solve_aggregated(build_aggregated_instance(inst, fine));
    CHECK(a.proven_bound <= star * (1 + 1e-9));
    CHECK(b.proven_bound <= star * (1 + 1e-9));
    CHECK(a.incumbent_value <= b.incumbent_value * (1 + 1e-6));
  }
}

TEST_CASE("results do not depend on the thread count") {
  const ProblemInstance inst = branching_instance(6, 200, 3);
  kernels::set_thread_count(1);
  const auto a = solve_full_scale(inst);
  kernels::set_thread_count(3);
  const auto b = solve_full_scale(inst);
  kernels::set_thread_count(0);
  CHECK(a.incumbent_value == b.incumbent_value);
  CHECK(a.proven_bound == b.proven_bound);
  CHECK(a.incumbent_plan == b.incumbent_plan);
}

TEST_CASE("option validation and names") {
  MilpOptions o;
  CHECK_NOTHROW(validate(o));
  o.mip_tol = 0.0;
  CHECK_THROWS_AS(validate(o), Error);
  o = MilpOptions{};
  o.node_limit = 0;
  CHECK_THROWS_AS(validate(o), Error);
  CHECK(parse_branching(to_string(Branching::lowest_index)) == Branching::lowest_index);
  CHECK(parse_search(to_string(Search::depth_first)) == Search::depth_first);
  CHECK_THROWS_AS(parse_search("breadth"), Error);
  CHECK(relative_gap(110.0, 100.0) == doctest::Approx(10.0 / 110.0));
}
