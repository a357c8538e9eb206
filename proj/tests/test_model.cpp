#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "vpp/error.hpp"
#include "vpp/model.hpp"

using namespace vpp;

namespace {

GeneratorSpec thermal(std::size_t id) {
  return {id, GeneratorKind::thermal, 40000.0, 50.0, 0.1, 1.0};
}

ProblemInstance one_thermal(std::vector<double> demand) {
  ProblemInstance inst;
  inst.generators = {thermal(0)};
  inst.horizon = demand.size();
  inst.ns_cost = 5000.0;
  inst.cap_factor = Matrix(1, demand.size(), 1.0);
  inst.demand = std::move(demand);
  return inst;
}

FullSolution zero_solution(const ProblemInstance& inst) {
  FullSolution s;
  s.plan = empty_plan(inst.generator_count());
  s.gen = Matrix(inst.generator_count(), inst.horizon, 0.0);
  s.unserved.assign(inst.horizon, 0.0);
  return s;
}

}  // namespace

TEST_CASE("full objective of a single thermal unit") {
  ProblemInstance inst = one_thermal({0.5, 0.5});
  FullSolution s = zero_solution(inst);
  s.plan = plan_from_capacity({0.5});
  s.gen(0, 0) = 0.5;
  s.gen(0, 1) = 0.5;
  CHECK(check_feasibility(inst, s).empty());
  CHECK(evaluate_full_objective(inst, s) == doctest::Approx(20050.0).epsilon(1e-15));
}

TEST_CASE("all-zero solution costs nothing") {
  ProblemInstance inst = one_thermal({0.0, 0.0, 0.0});
  CHECK(evaluate_full_objective(inst, zero_solution(inst)) == 0.0);
}

TEST_CASE("full objective equals a naive re-summation") {
  Rng rng(5);
  const ProblemInstance inst = oracle::random_instance(5, 24, 77);
  for (int rep = 0; rep < 20; ++rep) {
    const FullSolution s = oracle::random_feasible_solution(inst, rng);
    long double total = 0.0L;
    for (std::size_t g = 0; g < 5; ++g) {
      total += static_cast<long double>(inst.generators[g].inv_cost) * s.plan.capacity[g];
      for (std::size_t t = 0; t < 24; ++t) {
        total += static_cast<long double>(inst.generators[g].op_cost) * s.gen(g, t) * inst.delta;
      }
    }
    for (std::size_t t = 0; t < 24; ++t) total += static_cast<long double>(inst.ns_cost) * s.unserved[t];
    CHECK(evaluate_full_objective(inst, s) ==
          doctest::Approx(static_cast<double>(total)).epsilon(1e-12));
  }
}

TEST_CASE("aggregation averages demand over cluster members") {
  ProblemInstance inst = one_thermal({2, 4, 6, 8});
  const Partition part = make_partition({0, 0, 1, 1}, 2);
  const AggregatedInstance agg = build_aggregated_instance(inst, part);
  REQUIRE(agg.k_count == 2);
  CHECK(agg.avg_demand == std::vector<double>{3.0, 7.0});
  CHECK(agg.weights == std::vector<double>{2.0, 2.0});
}

TEST_CASE("singleton partition reproduces the instance") {
  const ProblemInstance inst = oracle::random_instance(4, 12, 3);
  const AggregatedInstance agg = build_aggregated_instance(inst, singleton_partition(12));
  CHECK(agg.avg_demand == inst.demand);
  for (double w : agg.weights) CHECK(w == 1.0);
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t t = 0; t < 12; ++t) CHECK(agg.avg_cap_factor(g, t) == inst.cap_factor(g, t));
  }
  Rng rng(1);
  const FullSolution s = oracle::random_feasible_solution(inst, rng);
  const AggregatedSolution a = map_full_to_aggregated(s, singleton_partition(12));
  CHECK(a.unserved == s.unserved);
  CHECK(evaluate_aggregated_objective(agg, a) == doctest::Approx(evaluate_full_objective(inst, s)));
}

TEST_CASE("aggregation conserves total demand and capacity factor mass") {
  Rng rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    const ProblemInstance inst = oracle::random_small_instance(rng, 2, 6, 5, 40);
    const Partition part = oracle::random_partition(inst.horizon, 1 + rng.below(inst.horizon), rng);
    const AggregatedInstance agg = build_aggregated_instance(inst, part);
    double wsum = 0, dsum = 0, dtrue = 0;
    for (std::size_t k = 0; k < agg.k_count; ++k) {
      wsum += agg.weights[k];
      dsum += agg.weights[k] * agg.avg_demand[k];
    }
    for (double d : inst.demand) dtrue += d;
    CHECK(wsum == doctest::Approx(static_cast<double>(inst.horizon)).epsilon(1e-12));
    CHECK(dsum == doctest::Approx(dtrue).epsilon(1e-9));
    for (std::size_t g = 0; g < inst.generator_count(); ++g) {
      double f = 0, ftrue = 0;
      for (std::size_t k = 0; k < agg.k_count; ++k) f += agg.weights[k] * agg.avg_cap_factor(g, k);
      for (std::size_t t = 0; t < inst.horizon; ++t) ftrue += inst.cap_factor(g, t);
      CHECK(f == doctest::Approx(ftrue).epsilon(1e-9));
    }
  }
}

TEST_CASE("mapping averages dispatch within clusters") {
  FullSolution s;
  s.plan = plan_from_capacity({5.0});
  s.gen = Matrix(1, 4);
  s.gen(0, 0) = 1;
  s.gen(0, 1) = 3;
  s.gen(0, 2) = 2;
  s.gen(0, 3) = 2;
  s.unserved = {0, 0, 0, 0};
  const AggregatedSolution a = map_full_to_aggregated(s, make_partition({0, 0, 1, 1}, 2));
  CHECK(a.gen(0, 0) == 2.0);
  CHECK(a.gen(0, 1) == 2.0);
  CHECK(a.plan == s.plan);
}

TEST_CASE("mapped solutions stay feasible with equal objective") {
  Rng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const ProblemInstance inst = oracle::random_small_instance(rng, 3, 10, 8, 64);
    const FullSolution s = oracle::random_feasible_solution(inst, rng);
    REQUIRE(check_feasibility(inst, s).empty());
    const Partition part = oracle::random_partition(inst.horizon, 1 + rng.below(inst.horizon), rng);
    const AggregatedInstance agg = build_aggregated_instance(inst, part);
    const AggregatedSolution a = map_full_to_aggregated(s, part);
    CHECK(check_feasibility(agg, a, 1e-7).empty());
    const double j = evaluate_full_objective(inst, s);
    CHECK(std::abs(evaluate_aggregated_objective(agg, a) - j) <= 1e-9 * std::max(1.0, std::abs(j)));
  }
}

TEST_CASE("violation reports") {
  ProblemInstance inst = one_thermal({1.0, 0.5});
  FullSolution s = zero_solution(inst);
  s.unserved = {1.0, 0.5};
  CHECK(check_feasibility(inst, s).empty());

  SUBCASE("balance") {
    s.unserved[0] -= 1.0;
    const auto rep = check_feasibility(inst, s);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].kind == ConstraintKind::power_balance);
    CHECK(rep[0].period == 0);
    CHECK(rep[0].magnitude == doctest::Approx(1.0));
  }
  SUBCASE("semi-continuity") {
    s.plan.capacity = {0.05};
    s.plan.built = {1};
    const auto rep = check_feasibility(inst, s);
    REQUIRE(!rep.empty());
    CHECK(rep[0].kind == ConstraintKind::capacity_lower);
    CHECK(rep[0].generator == 0);
  }
  SUBCASE("generation above available capacity") {
    s.plan = plan_from_capacity({0.5});
    s.gen(0, 0) = 0.7;
    s.unserved[0] = 0.3;
    const auto rep = check_feasibility(inst, s);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].kind == ConstraintKind::generation_upper);
    CHECK(rep[0].magnitude == doctest::Approx(0.2));
  }
}

TEST_CASE("instance validation") {
  ProblemInstance inst = one_thermal({1.0});
  CHECK(validate(inst).empty());
  SUBCASE("negative demand") {
    inst.demand[0] = -1.0;
    CHECK_THROWS_AS(validate(inst), Error);
  }
  SUBCASE("capacity factor above one") {
    inst.cap_factor(0, 0) = 1.3;
    CHECK_THROWS_AS(validate(inst), Error);
  }
  SUBCASE("cheap shedding only warns") {
    inst.ns_cost = 10.0;
    CHECK(validate(inst).size() == 1);
  }
}

TEST_CASE("partition validation") {
  CHECK_NOTHROW(validate(make_partition({0, 1, 0}, 2), 3));
  try {
    validate(make_partition({0, 0, 0}, 2), 3);
    FAIL("expected empty cluster");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_cluster);
  }
  CHECK_THROWS_AS(validate(make_partition({0, 1}, 2), 3), Error);
  const Partition one = single_cluster_partition(5);
  CHECK(one.k_count == 1);
  CHECK(one.sizes[0] == 5);
}
