#pragma once

// Period clustering for representative-period aggregation.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vpp/matrix.hpp"
#include "vpp/model.hpp"

namespace vpp {

enum class ClusterMethod { kmeans, kmedoids, gmm };
enum class Scaling { minmax, zscore };

// Which per-period series enter the feature vector.
//   full:     [D_t, F_1t, ..., F_Gt]
//   net_load: [D_t, D_t/delta - sum_g F_gt * cap_max_g]
// net_load tracks the quantity that drives the operating cost and clusters
// far more tightly for the same K; it is the default.
enum class FeatureSet { net_load, full };

const char* to_string(ClusterMethod method);
const char* to_string(Scaling scaling);
const char* to_string(FeatureSet set);
ClusterMethod parse_cluster_method(const std::string& text);
Scaling parse_scaling(const std::string& text);
FeatureSet parse_feature_set(const std::string& text);

struct ScalingRecord {
  Scaling mode = Scaling::minmax;
  std::vector<double> shift;       // per dimension
  std::vector<double> scale;       // per dimension; scaled = (raw - shift) / scale
  std::vector<char> degenerate;    // constant dimension, scale forced to 1
};

struct FeatureMatrix {
  FeatureSet set = FeatureSet::net_load;
  Matrix rows;  // |T| x dim
  ScalingRecord scaling;

  std::size_t periods() const noexcept { return rows.rows(); }
  std::size_t dim() const noexcept { return rows.cols(); }
};

FeatureMatrix build_features(const ProblemInstance& instance, Scaling mode = Scaling::minmax,
                             FeatureSet set = FeatureSet::net_load);

/// Raw (unscaled) feature values recovered from the scaling record.
Matrix unscale(const FeatureMatrix& features);

struct ClusterOptions {
  std::size_t restarts = 3;
  std::size_t max_iter = 300;
  double gmm_tol = 1e-3;  // EM stops when log-likelihood per period moves less
  bool parallel = true;
};

Partition cluster(const FeatureMatrix& features, std::size_t k, ClusterMethod method,
                  std::uint64_t seed, const ClusterOptions& opts = {});

struct KMeansRun {
  std::vector<std::size_t> assignment;
  Matrix centers;
  double wcss = 0.0;
  std::vector<double> history;  // WCSS after every assignment step
  std::size_t iterations = 0;
};

struct KMedoidsRun {
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> medoids;  // period indices
  double cost = 0.0;                 // sum of squared distances to medoids
  std::vector<double> history;
  std::size_t iterations = 0;
};

struct GmmModel {
  std::size_t k_count = 0;
  std::vector<double> weights;
  Matrix means;      // K x dim
  Matrix variances;  // K x dim
  double log_likelihood = 0.0;
};

struct GmmRun {
  GmmModel model;
  std::vector<std::size_t> assignment;
  std::vector<double> history;  // log-likelihood at every E-step
  std::size_t iterations = 0;
};

inline constexpr double kVarianceFloor = 1e-6;

/// Single runs (no restarts, no k == n shortcut). Labels are already
/// repaired so that every cluster is nonempty.
KMeansRun kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                 bool parallel = true);
KMedoidsRun kmedoids(const Matrix& points, std::size_t k, std::uint64_t seed,
                     std::size_t max_iter, bool build_init);
GmmRun gmm(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
           double tol = 1e-3, bool parallel = true);

}  // namespace vpp
