#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "vpp/clustering.hpp"
#include "vpp/kernels.hpp"

using namespace vpp;
using namespace vpp::kernels;

namespace {

std::vector<double> random_capacity(const ProblemInstance& inst, Rng& rng) {
  std::vector<double> cap(inst.generator_count(), 0.0);
  for (std::size_t g = 0; g < cap.size(); ++g) {
    if (rng.uniform() < 0.7) cap[g] = rng.uniform(0.1, 1.0);
  }
  return cap;
}

double weighted_cost(const PeriodData& data, const DispatchBuffers& buf) {
  double total = 0.0;
  for (std::size_t t = 0; t < data.periods; ++t) total += data.weight[t] * buf.period_cost[t];
  return total;
}

}  // namespace

TEST_CASE("merit order sorts by cost, ties by index, drops units dearer than shedding") {
  std::vector<GeneratorSpec> g(4);
  g[0].op_cost = 50;
  g[1].op_cost = 3;
  g[2].op_cost = 50;
  g[3].op_cost = 6000;
  CHECK(merit_order(g, 5000.0) == std::vector<std::size_t>{1, 0, 2});
  g[3].op_cost = 5000;
  CHECK(merit_order(g, 5000.0) == std::vector<std::size_t>{1, 0, 2, 3});
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const ProblemInstance inst = oracle::random_instance(12, 700, 4);
  const PeriodData data = make_period_data(inst);
  Rng rng(3);
  const auto cap = random_capacity(inst, rng);
  for (std::size_t threads : {1u, 2u, 3u}) {
    set_thread_count(threads);
    DispatchBuffers a, b;
    dispatch_serial(data, cap, a);
    dispatch_parallel(data, cap, b);
    CHECK(a.unserved == b.unserved);
    CHECK(a.period_cost == b.period_cost);
    CHECK(a.gen.data() == b.gen.data());

    RecourseScratch sa, sb;
    RecourseCut ca, cb;
    recourse_serial(data, cap, sa, ca);
    recourse_parallel(data, cap, sb, cb);
    CHECK(ca.value == cb.value);
    CHECK(ca.intercept == cb.intercept);
    CHECK(ca.slope == cb.slope);

    const Matrix pts = build_features(inst).rows;
    const KMeansRun km = kmeans(pts, 9, 1, 3, false);
    std::vector<std::size_t> la, lb;
    std::vector<double> da, db;
    assign_serial(pts, km.centers, la, da);
    assign_parallel(pts, km.centers, lb, db);
    CHECK(la == lb);
    CHECK(da == db);

    Matrix variances(9, pts.cols(), 0.02);
    std::vector<double> logw(9, -std::log(9.0));
    Matrix ra, rb;
    std::vector<double> pa, pb;
    const double lla = estep_serial(pts, logw, km.centers, variances, ra, pa);
    const double llb = estep_parallel(pts, logw, km.centers, variances, rb, pb);
    CHECK(lla == llb);
    CHECK(ra.data() == rb.data());
  }
  set_thread_count(0);
}

TEST_CASE("recourse value equals the dispatched operating cost") {
  const ProblemInstance inst = oracle::random_instance(7, 200, 8);
  const PeriodData data = make_period_data(inst);
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto cap = random_capacity(inst, rng);
    DispatchBuffers buf;
    dispatch_serial(data, cap, buf);
    RecourseScratch sc;
    RecourseCut cut;
    recourse_serial(data, cap, sc, cut);
    CHECK(cut.value == doctest::Approx(weighted_cost(data, buf)).epsilon(1e-12));
  }
}

TEST_CASE("recourse cuts are tight at the query point and valid elsewhere") {
  const ProblemInstance inst = oracle::random_instance(6, 150, 12);
  const PeriodData data = make_period_data(inst);
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = random_capacity(inst, rng);
    RecourseScratch sc;
    RecourseCut cut;
    recourse_serial(data, x, sc, cut);
    double at_x = cut.intercept;
    for (std::size_t g = 0; g < x.size(); ++g) {
      CHECK(cut.slope[g] >= 0.0);
      at_x -= cut.slope[g] * x[g];
    }
    CHECK(at_x == doctest::Approx(cut.value).epsilon(1e-10));
    for (int probe = 0; probe < 10; ++probe) {
      const auto y = random_capacity(inst, rng);
      RecourseCut other;
      recourse_serial(data, y, sc, other);
      double lin = cut.intercept;
      for (std::size_t g = 0; g < y.size(); ++g) lin -= cut.slope[g] * y[g];
      CHECK(other.value >= lin - 1e-9 * std::max(1.0, std::abs(lin)));
    }
  }
}

TEST_CASE("aggregated period data carries cluster weights") {
  const ProblemInstance inst = oracle::random_instance(4, 30, 2);
  Rng rng(1);
  const Partition part = oracle::random_partition(30, 7, rng);
  const PeriodData data = make_period_data(build_aggregated_instance(inst, part));
  CHECK(data.periods == 7);
  double w = 0.0;
  for (double v : data.weight) w += v;
  CHECK(w == 30.0);
}
