#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracle.hpp"
#include "vpp/clustering.hpp"
#include "vpp/error.hpp"
#include "vpp/kernels.hpp"

using namespace vpp;

namespace {

constexpr ClusterMethod kAll[] = {ClusterMethod::kmeans, ClusterMethod::kmedoids,
                                  ClusterMethod::gmm};

FeatureMatrix wrap(Matrix m) {
  FeatureMatrix f;
  f.rows = std::move(m);
  return f;
}

ProblemInstance two_period_instance() {
  ProblemInstance inst;
  inst.generators = {{0, GeneratorKind::renewable, 1.0, 1.0, 0.1, 1.0}};
  inst.horizon = 2;
  inst.ns_cost = 5000.0;
  inst.cap_factor = Matrix(1, 2);
  inst.cap_factor(0, 0) = 0.0;
  inst.cap_factor(0, 1) = 1.0;
  inst.demand = {0.0, 10.0};
  return inst;
}

bool nonincreasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1] + 1e-9 * std::max(1.0, std::abs(h[i - 1]))) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("two-point min-max features") {
  const FeatureMatrix f = build_features(two_period_instance(), Scaling::minmax, FeatureSet::full);
  REQUIRE(f.dim() == 2);
  CHECK(f.rows(0, 0) == 0.0);
  CHECK(f.rows(0, 1) == 0.0);
  CHECK(f.rows(1, 0) == 1.0);
  CHECK(f.rows(1, 1) == 1.0);
}

TEST_CASE("net load features track demand minus available renewable output") {
  const ProblemInstance inst = two_period_instance();
  const FeatureMatrix f = build_features(inst, Scaling::minmax, FeatureSet::net_load);
  const Matrix raw = unscale(f);
  CHECK(raw(0, 0) == 0.0);
  CHECK(raw(1, 0) == 10.0);
  CHECK(raw(0, 1) == doctest::Approx(0.0));
  CHECK(raw(1, 1) == doctest::Approx(9.0));
}

TEST_CASE("constant dimensions are flagged and zeroed") {
  ProblemInstance inst = oracle::random_instance(3, 20, 1);
  std::fill(inst.demand.begin(), inst.demand.end(), 4.0);
  const FeatureMatrix f = build_features(inst, Scaling::zscore, FeatureSet::full);
  CHECK(f.scaling.degenerate[0]);
  for (std::size_t t = 0; t < 20; ++t) CHECK(f.rows(t, 0) == 0.0);
}

TEST_CASE("scaling ranges and the unscale round trip") {
  const ProblemInstance inst = oracle::random_instance(6, 120, 2);
  for (FeatureSet set : {FeatureSet::net_load, FeatureSet::full}) {
    const FeatureMatrix mm = build_features(inst, Scaling::minmax, set);
    for (std::size_t d = 0; d < mm.dim(); ++d) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t t = 0; t < mm.periods(); ++t) {
        lo = std::min(lo, mm.rows(t, d));
        hi = std::max(hi, mm.rows(t, d));
      }
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
    }
    const FeatureMatrix z = build_features(inst, Scaling::zscore, set);
    for (std::size_t d = 0; d < z.dim(); ++d) {
      if (z.scaling.degenerate[d]) continue;
      double mean = 0.0, var = 0.0;
      for (std::size_t t = 0; t < z.periods(); ++t) mean += z.rows(t, d);
      mean /= static_cast<double>(z.periods());
      for (std::size_t t = 0; t < z.periods(); ++t) var += (z.rows(t, d) - mean) * (z.rows(t, d) - mean);
      var /= static_cast<double>(z.periods());
      CHECK(std::abs(mean) < 1e-12);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    }
    // raw values recovered from the record
    const Matrix raw = unscale(mm);
    for (std::size_t t = 0; t < inst.horizon; ++t) {
      CHECK(std::abs(raw(t, 0) - inst.demand[t]) <= 1e-12 * std::max(1.0, inst.demand[t]));
      if (set == FeatureSet::full) {
        for (std::size_t g = 0; g < 6; ++g) CHECK(std::abs(raw(t, 1 + g) - inst.cap_factor(g, t)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("k equal to the horizon and k equal to one") {
  const FeatureMatrix f = build_features(oracle::random_instance(4, 30, 3));
  for (ClusterMethod m : kAll) {
    const Partition all = cluster(f, 30, m, 1);
    for (std::size_t t = 0; t < 30; ++t) CHECK(all.assignment[t] == t);
    const Partition one = cluster(f, 1, m, 1);
    CHECK(one.k_count == 1);
    CHECK(one.sizes[0] == 30);
  }
  CHECK_THROWS_AS(cluster(f, 0, ClusterMethod::kmeans, 1), Error);
  CHECK_THROWS_AS(cluster(f, 31, ClusterMethod::kmeans, 1), Error);
}

TEST_CASE("well separated groups are split exactly") {
  Matrix pts(40, 2);
  Rng rng(5);
  for (std::size_t t = 0; t < 40; ++t) {
    const double base = t % 2 ? 1.0 : 0.0;
    pts(t, 0) = base;
    pts(t, 1) = base + rng.uniform(-0.01, 0.01);
  }
  for (ClusterMethod m : kAll) {
    const Partition p = cluster(wrap(pts), 2, m, 3);
    CAPTURE(to_string(m));
    for (std::size_t t = 2; t < 40; ++t) CHECK(p.assignment[t] == p.assignment[t % 2]);
    CHECK(p.assignment[0] != p.assignment[1]);
  }
}

TEST_CASE("Lloyd and medoid costs never rise, EM likelihood never falls") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Matrix pts = build_features(oracle::random_instance(8, 250, seed), Scaling::minmax,
                                      FeatureSet::full).rows;
    for (std::size_t k : {3u, 10u, 25u}) {
      const auto km = kmeans(pts, k, seed, 300);
      CHECK(nonincreasing(km.history));
      CHECK(km.wcss == km.history.back());
      const auto md = kmedoids(pts, k, seed, 300, true);
      CHECK(nonincreasing(md.history));
      const auto gm = gmm(pts, k, seed, 300, 1e-10);
      for (std::size_t i = 1; i < gm.history.size(); ++i) {
        CHECK(gm.history[i] >= gm.history[i - 1] - 1e-9 * std::max(1.0, std::abs(gm.history[i - 1])));
      }
      const double wsum = std::accumulate(gm.model.weights.begin(), gm.model.weights.end(), 0.0);
      CHECK(std::abs(wsum - 1.0) <= 1e-12);
      for (double v : gm.model.variances.data()) CHECK(v >= kVarianceFloor);
    }
  }
}

TEST_CASE("duplicate points still give nonempty clusters") {
  Matrix pts(12, 1, 0.0);
  pts(11, 0) = 1.0;
  for (ClusterMethod m : kAll) {
    const Partition p = cluster(wrap(pts), 5, m, 2);
    CHECK_NOTHROW(validate(p, 12));
  }
}

TEST_CASE("fixed seeds reproduce partitions at any thread count") {
  const FeatureMatrix f = build_features(oracle::random_instance(10, 400, 6));
  for (ClusterMethod m : kAll) {
    kernels::set_thread_count(1);
    const Partition a = cluster(f, 17, m, 9);
    kernels::set_thread_count(3);
    const Partition b = cluster(f, 17, m, 9);
    ClusterOptions serial;
    serial.parallel = false;
    const Partition c = cluster(f, 17, m, 9, serial);
    CHECK(a.assignment == b.assignment);
    CHECK(a.assignment == c.assignment);
  }
  kernels::set_thread_count(0);
}

TEST_CASE("method names round trip") {
  for (ClusterMethod m : kAll) CHECK(parse_cluster_method(to_string(m)) == m);
  CHECK(parse_scaling("zscore") == Scaling::zscore);
  CHECK(parse_feature_set("full") == FeatureSet::full);
  CHECK_THROWS_AS(parse_cluster_method("dbscan"), Error);
}
