#pragma once

// Data-parallel inner loops. Every kernel comes in a serial reference form and
// an OpenMP form; both write per-item results into caller-owned buffers and
// leave reductions to a fixed-order serial pass, so the two variants agree
// bit for bit at any thread count.

#include <cstddef>
#include <vector>

#include "vpp/matrix.hpp"
#include "vpp/model.hpp"

namespace vpp::kernels {

/// Sets the OpenMP thread budget; n == 0 leaves the runtime default.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Operational data for a set of periods, full-scale (weights 1) or
/// cluster-aggregated (weights T_k).
struct PeriodData {
  std::size_t generators = 0;
  std::size_t periods = 0;
  double delta = 1.0;
  double ns_cost = 0.0;
  std::vector<double> op_cost;  // |G|
  std::vector<double> weight;   // periods
  std::vector<double> demand;   // periods, MWh
  Matrix cap_factor;            // |G| x periods
  // Generators in dispatch order: ascending op cost, ties by index, those
  // dearer than shedding left out.
  std::vector<std::size_t> merit_order;
};

/// Ascending op cost, ties by index; generators dearer than shedding dropped.
std::vector<std::size_t> merit_order(const std::vector<GeneratorSpec>& generators, double ns_cost);

PeriodData make_period_data(const ProblemInstance& instance);
PeriodData make_period_data(const AggregatedInstance& agg);

/// Merit-order dispatch of every period at fixed capacities. gen is |G| x
/// periods (MW); unserved and period_cost have one entry per period.
struct DispatchBuffers {
  Matrix gen;
  std::vector<double> unserved;
  std::vector<double> period_cost;  // unweighted
};

void dispatch_serial(const PeriodData& data, const std::vector<double>& capacity,
                     DispatchBuffers& out);
void dispatch_parallel(const PeriodData& data, const std::vector<double>& capacity,
                       DispatchBuffers& out);

/// Weighted operating cost Q(x) = sum_k w_k Q_k(x) and the supporting cut
/// Q(x') >= intercept - sum_g slope[g] x'_g, tight at x. slope >= 0.
struct RecourseCut {
  double value = 0.0;
  double intercept = 0.0;
  std::vector<double> slope;
};

/// Scratch buffers let callers reuse allocations across evaluations.
struct RecourseScratch {
  std::vector<double> cost;   // per period
  std::vector<double> price;  // per period, marginal price of the balance row
};

void recourse_serial(const PeriodData& data, const std::vector<double>& capacity,
                     RecourseScratch& scratch, RecourseCut& cut);
void recourse_parallel(const PeriodData& data, const std::vector<double>& capacity,
                       RecourseScratch& scratch, RecourseCut& cut);

/// Nearest center by squared Euclidean distance, ties to the lowest index.
/// points is n x dim, centers k x dim.
void assign_serial(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& label,
                   std::vector<double>& dist2);
void assign_parallel(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& label,
                     std::vector<double>& dist2);

/// Diagonal-Gaussian E-step. Fills resp (n x k) with responsibilities and
/// point_ll with log p(x_t); returns the fixed-order sum of point_ll.
double estep_serial(const Matrix& points, const std::vector<double>& log_weight,
                    const Matrix& means, const Matrix& variances, Matrix& resp,
                    std::vector<double>& point_ll);
double estep_parallel(const Matrix& points, const std::vector<double>& log_weight,
                      const Matrix& means, const Matrix& variances, Matrix& resp,
                      std::vector<double>& point_ll);

}  // namespace vpp::kernels
