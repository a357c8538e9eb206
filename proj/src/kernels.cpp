#include "vpp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vpp/error.hpp"

namespace vpp::kernels {

void set_thread_count(std::size_t n) {
  if (n > 0) omp_set_num_threads(static_cast<int>(n));
}

std::size_t thread_count() { return static_cast<std::size_t>(omp_get_max_threads()); }

namespace {

// One period of merit-order dispatch. gen points at column t of a |G| x P
// row-major matrix (stride P), or is null when only cost and price are needed.
inline double dispatch_one(const PeriodData& d, const double* x, std::size_t t, double* gen,
                           double& unserved, double& price) {
  const std::size_t P = d.periods;
  double remaining = d.demand[t];
  double cost = 0.0;
  price = 0.0;
  for (std::size_t g : d.merit_order) {
    if (remaining <= 0.0) break;
    const double avail = d.cap_factor(g, t) * x[g];
    if (avail <= 0.0) continue;
    const double need = remaining / d.delta;
    double p;
    if (avail >= need) {
      p = need;
      remaining = 0.0;
    } else {
      p = avail;
      remaining = std::max(0.0, remaining - p * d.delta);
    }
    if (gen) gen[g * P] = p;
    cost += d.op_cost[g] * p * d.delta;
    price = d.op_cost[g];
  }
  if (remaining > 0.0) {
    cost += d.ns_cost * remaining;
    price = d.ns_cost;
  }
  unserved = remaining;
  return cost;
}

void check_capacity(const PeriodData& d, const std::vector<double>& capacity) {
  if (capacity.size() != d.generators) {
    throw Error(ErrorCode::dimension_mismatch, "capacity vector length differs from |G|");
  }
}

void prepare(const PeriodData& d, DispatchBuffers& out) {
  if (out.gen.rows() != d.generators || out.gen.cols() != d.periods) {
    out.gen = Matrix(d.generators, d.periods);
  } else {
    std::fill(out.gen.data().begin(), out.gen.data().end(), 0.0);
  }
  out.unserved.assign(d.periods, 0.0);
  out.period_cost.assign(d.periods, 0.0);
}

void finish_cut(const PeriodData& d, RecourseScratch& s, RecourseCut& cut, bool parallel) {
  double value = 0.0;
  double intercept = 0.0;
  for (std::size_t t = 0; t < d.periods; ++t) {
    value += d.weight[t] * s.cost[t];
    intercept += d.weight[t] * s.price[t] * d.demand[t];
  }
  cut.value = value;
  cut.intercept = intercept;
  cut.slope.assign(d.generators, 0.0);
  const auto G = static_cast<std::ptrdiff_t>(d.generators);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t gi = 0; gi < G; ++gi) {
    const auto g = static_cast<std::size_t>(gi);
    const double a = d.op_cost[g];
    if (a > d.ns_cost) continue;
    const double* f = d.cap_factor.row(g).data();
    double acc = 0.0;
    for (std::size_t t = 0; t < d.periods; ++t) {
      const double margin = s.price[t] - a;
      if (margin > 0.0) acc += d.weight[t] * f[t] * margin;
    }
    cut.slope[g] = acc * d.delta;
  }
}

inline void assign_one(const Matrix& points, const Matrix& centers, std::size_t t,
                       std::size_t& label, double& dist2) {
  const std::size_t dim = points.cols();
  const double* p = points.row(t).data();
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t k = 0; k < centers.rows(); ++k) {
    const double* c = centers.row(k).data();
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = p[j] - c[j];
      s += diff * diff;
    }
    if (s < best_d) {
      best_d = s;
      best = k;
    }
  }
  label = best;
  dist2 = best_d;
}

std::vector<double> component_constants(const std::vector<double>& log_weight,
                                        const Matrix& variances) {
  std::vector<double> c(variances.rows());
  for (std::size_t k = 0; k < variances.rows(); ++k) {
    double s = 0.0;
    for (double v : variances.row(k)) s += std::log(2.0 * std::numbers::pi * v);
    c[k] = log_weight[k] - 0.5 * s;
  }
  return c;
}

inline double estep_one(const Matrix& points, const std::vector<double>& konst,
                        const Matrix& means, const Matrix& variances, std::size_t t,
                        double* resp) {
  const std::size_t K = means.rows();
  const std::size_t dim = points.cols();
  const double* p = points.row(t).data();
  double top = -INFINITY;
  for (std::size_t k = 0; k < K; ++k) {
    const double* mu = means.row(k).data();
    const double* var = variances.row(k).data();
    double q = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = p[j] - mu[j];
      q += diff * diff / var[j];
    }
    resp[k] = konst[k] - 0.5 * q;
    top = std::max(top, resp[k]);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < K; ++k) s += std::exp(resp[k] - top);
  const double ll = top + std::log(s);
  for (std::size_t k = 0; k < K; ++k) resp[k] = std::exp(resp[k] - ll);
  return ll;
}

void prepare_estep(const Matrix& points, const Matrix& means, Matrix& resp,
                   std::vector<double>& point_ll) {
  if (resp.rows() != points.rows() || resp.cols() != means.rows()) {
    resp = Matrix(points.rows(), means.rows());
  }
  point_ll.assign(points.rows(), 0.0);
}

}  // namespace

std::vector<std::size_t> merit_order(const std::vector<GeneratorSpec>& generators, double ns_cost) {
  std::vector<std::size_t> order;
  for (std::size_t g = 0; g < generators.size(); ++g) {
    if (generators[g].op_cost <= ns_cost) order.push_back(g);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return generators[a].op_cost < generators[b].op_cost;
  });
  return order;
}

PeriodData make_period_data(const ProblemInstance& instance) {
  PeriodData d;
  d.generators = instance.generator_count();
  d.periods = instance.horizon;
  d.delta = instance.delta;
  d.ns_cost = instance.ns_cost;
  for (const auto& g : instance.generators) d.op_cost.push_back(g.op_cost);
  d.weight.assign(d.periods, 1.0);
  d.demand = instance.demand;
  d.cap_factor = instance.cap_factor;
  d.merit_order = merit_order(instance.generators, instance.ns_cost);
  return d;
}

PeriodData make_period_data(const AggregatedInstance& agg) {
  PeriodData d;
  d.generators = agg.generator_count();
  d.periods = agg.k_count;
  d.delta = agg.delta;
  d.ns_cost = agg.ns_cost;
  for (const auto& g : agg.generators) d.op_cost.push_back(g.op_cost);
  d.weight = agg.weights;
  d.demand = agg.avg_demand;
  d.cap_factor = agg.avg_cap_factor;
  d.merit_order = merit_order(agg.generators, agg.ns_cost);
  return d;
}

void dispatch_serial(const PeriodData& data, const std::vector<double>& capacity,
                     DispatchBuffers& out) {
  check_capacity(data, capacity);
  prepare(data, out);
  double price = 0.0;
  for (std::size_t t = 0; t < data.periods; ++t) {
    out.period_cost[t] =
        dispatch_one(data, capacity.data(), t, &out.gen(0, t), out.unserved[t], price);
  }
}

void dispatch_parallel(const PeriodData& data, const std::vector<double>& capacity,
                       DispatchBuffers& out) {
  check_capacity(data, capacity);
  prepare(data, out);
  const auto P = static_cast<std::ptrdiff_t>(data.periods);
  double* gen = out.gen.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ti = 0; ti < P; ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    double price = 0.0;
    out.period_cost[t] = dispatch_one(data, capacity.data(), t, gen + t, out.unserved[t], price);
  }
}

void recourse_serial(const PeriodData& data, const std::vector<double>& capacity,
                     RecourseScratch& scratch, RecourseCut& cut) {
  check_capacity(data, capacity);
  scratch.cost.assign(data.periods, 0.0);
  scratch.price.assign(data.periods, 0.0);
  double unserved = 0.0;
  for (std::size_t t = 0; t < data.periods; ++t) {
    scratch.cost[t] = dispatch_one(data, capacity.data(), t, nullptr, unserved, scratch.price[t]);
  }
  finish_cut(data, scratch, cut, false);
}

void recourse_parallel(const PeriodData& data, const std::vector<double>& capacity,
                       RecourseScratch& scratch, RecourseCut& cut) {
  check_capacity(data, capacity);
  scratch.cost.assign(data.periods, 0.0);
  scratch.price.assign(data.periods, 0.0);
  const auto P = static_cast<std::ptrdiff_t>(data.periods);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ti = 0; ti < P; ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    double unserved = 0.0;
    scratch.cost[t] = dispatch_one(data, capacity.data(), t, nullptr, unserved, scratch.price[t]);
  }
  finish_cut(data, scratch, cut, true);
}

void assign_serial(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& label,
                   std::vector<double>& dist2) {
  label.assign(points.rows(), 0);
  dist2.assign(points.rows(), 0.0);
  for (std::size_t t = 0; t < points.rows(); ++t) assign_one(points, centers, t, label[t], dist2[t]);
}

void assign_parallel(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& label,
                     std::vector<double>& dist2) {
  label.assign(points.rows(), 0);
  dist2.assign(points.rows(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ti = 0; ti < n; ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    assign_one(points, centers, t, label[t], dist2[t]);
  }
}

double estep_serial(const Matrix& points, const std::vector<double>& log_weight,
                    const Matrix& means, const Matrix& variances, Matrix& resp,
                    std::vector<double>& point_ll) {
  prepare_estep(points, means, resp, point_ll);
  const auto konst = component_constants(log_weight, variances);
  for (std::size_t t = 0; t < points.rows(); ++t) {
    point_ll[t] = estep_one(points, konst, means, variances, t, resp.row(t).data());
  }
  return std::accumulate(point_ll.begin(), point_ll.end(), 0.0);
}

double estep_parallel(const Matrix& points, const std::vector<double>& log_weight,
                      const Matrix& means, const Matrix& variances, Matrix& resp,
                      std::vector<double>& point_ll) {
  prepare_estep(points, means, resp, point_ll);
  const auto konst = component_constants(log_weight, variances);
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ti = 0; ti < n; ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    point_ll[t] = estep_one(points, konst, means, variances, t, resp.row(t).data());
  }
  return std::accumulate(point_ll.begin(), point_ll.end(), 0.0);
}

}  // namespace vpp::kernels
