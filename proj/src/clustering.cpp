#include "vpp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vpp/error.hpp"
#include "vpp/kernels.hpp"
#include "vpp/rng.hpp"

namespace vpp {

const char* to_string(ClusterMethod method) {
  switch (method) {
    case ClusterMethod::kmeans: return "kmeans";
    case ClusterMethod::kmedoids: return "kmedoids";
    case ClusterMethod::gmm: return "gmm";
  }
  return "unknown";
}

const char* to_string(Scaling scaling) { return scaling == Scaling::minmax ? "minmax" : "zscore"; }

const char* to_string(FeatureSet set) { return set == FeatureSet::net_load ? "net_load" : "full"; }

ClusterMethod parse_cluster_method(const std::string& text) {
  if (text == "kmeans") return ClusterMethod::kmeans;
  if (text == "kmedoids") return ClusterMethod::kmedoids;
  if (text == "gmm") return ClusterMethod::gmm;
  throw Error(ErrorCode::invalid_input, "unknown clustering method '" + text + "'");
}

Scaling parse_scaling(const std::string& text) {
  if (text == "minmax") return Scaling::minmax;
  if (text == "zscore") return Scaling::zscore;
  throw Error(ErrorCode::invalid_input, "unknown feature scaling '" + text + "'");
}

FeatureSet parse_feature_set(const std::string& text) {
  if (text == "net_load") return FeatureSet::net_load;
  if (text == "full") return FeatureSet::full;
  throw Error(ErrorCode::invalid_input, "unknown feature set '" + text + "'");
}

FeatureMatrix build_features(const ProblemInstance& instance, Scaling mode, FeatureSet set) {
  const std::size_t T = instance.horizon;
  const std::size_t G = instance.generator_count();
  if (T == 0) throw Error(ErrorCode::invalid_input, "cannot build features for an empty horizon");
  if (instance.demand.size() != T || instance.cap_factor.rows() != G ||
      instance.cap_factor.cols() != T) {
    throw Error(ErrorCode::dimension_mismatch, "instance arrays do not match the horizon");
  }
  FeatureMatrix fm;
  fm.set = set;
  const std::size_t dim = set == FeatureSet::full ? 1 + G : 2;
  fm.rows = Matrix(T, dim);
  for (std::size_t t = 0; t < T; ++t) {
    fm.rows(t, 0) = instance.demand[t];
    if (set == FeatureSet::full) {
      for (std::size_t g = 0; g < G; ++g) fm.rows(t, 1 + g) = instance.cap_factor(g, t);
    } else {
      double avail = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        avail += instance.cap_factor(g, t) * instance.generators[g].cap_max;
      }
      fm.rows(t, 1) = instance.demand[t] / instance.delta - avail;
    }
  }
  ScalingRecord& rec = fm.scaling;
  rec.mode = mode;
  rec.shift.assign(dim, 0.0);
  rec.scale.assign(dim, 1.0);
  rec.degenerate.assign(dim, 0);
  for (std::size_t j = 0; j < dim; ++j) {
    double shift = 0.0;
    double scale = 0.0;
    if (mode == Scaling::minmax) {
      double lo = fm.rows(0, j);
      double hi = lo;
      for (std::size_t t = 1; t < T; ++t) {
        lo = std::min(lo, fm.rows(t, j));
        hi = std::max(hi, fm.rows(t, j));
      }
      shift = lo;
      scale = hi - lo;
    } else {
      double mean = 0.0;
      for (std::size_t t = 0; t < T; ++t) mean += fm.rows(t, j);
      mean /= static_cast<double>(T);
      double var = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double d = fm.rows(t, j) - mean;
        var += d * d;
      }
      shift = mean;
      scale = std::sqrt(var / static_cast<double>(T));
    }
    if (!(scale > 0.0)) {
      scale = 1.0;
      rec.degenerate[j] = 1;
    }
    rec.shift[j] = shift;
    rec.scale[j] = scale;
    for (std::size_t t = 0; t < T; ++t) {
      fm.rows(t, j) = rec.degenerate[j] ? 0.0 : (fm.rows(t, j) - shift) / scale;
    }
  }
  return fm;
}

Matrix unscale(const FeatureMatrix& features) {
  Matrix raw = features.rows;
  const auto& rec = features.scaling;
  for (std::size_t t = 0; t < raw.rows(); ++t) {
    for (std::size_t j = 0; j < raw.cols(); ++j) {
      raw(t, j) = rec.degenerate[j] ? rec.shift[j] : raw(t, j) * rec.scale[j] + rec.shift[j];
    }
  }
  return raw;
}

namespace {

double dist2(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  const double* x = a.row(i).data();
  const double* y = b.row(j).data();
  double s = 0.0;
  for (std::size_t d = 0; d < a.cols(); ++d) {
    const double diff = x[d] - y[d];
    s += diff * diff;
  }
  return s;
}

void check_k(std::size_t n, std::size_t k) {
  if (n == 0) throw Error(ErrorCode::invalid_input, "no periods to cluster");
  if (k == 0 || k > n) {
    throw Error(ErrorCode::invalid_input, "cluster count " + std::to_string(k) +
                                              " outside [1, " + std::to_string(n) + "]");
  }
}

void assign(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& label,
            std::vector<double>& d2, bool parallel) {
  if (parallel) kernels::assign_parallel(points, centers, label, d2);
  else kernels::assign_serial(points, centers, label, d2);
}

std::vector<std::size_t> sizes_of(const std::vector<std::size_t>& label, std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t l : label) ++sizes[l];
  return sizes;
}

// Moves the point farthest from its own center (among clusters that can
// spare one) into each empty cluster. d2[t] is the squared distance of t to
// its current center; on_move(t, k) lets the caller re-center cluster k.
template <class OnMove>
void repair_empty(std::vector<std::size_t>& label, std::vector<double>& d2, std::size_t k,
                  OnMove on_move) {
  auto sizes = sizes_of(label, k);
  for (std::size_t j = 0; j < k; ++j) {
    if (sizes[j] > 0) continue;
    std::size_t pick = label.size();
    double far = -1.0;
    for (std::size_t t = 0; t < label.size(); ++t) {
      if (sizes[label[t]] > 1 && d2[t] > far) {
        far = d2[t];
        pick = t;
      }
    }
    if (pick == label.size()) throw Error(ErrorCode::empty_cluster, "cannot repair empty cluster");
    --sizes[label[pick]];
    label[pick] = j;
    sizes[j] = 1;
    d2[pick] = 0.0;
    on_move(pick, j);
  }
}

std::vector<std::size_t> plusplus_seed(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  std::vector<std::size_t> chosen;
  chosen.push_back(static_cast<std::size_t>(rng.below(n)));
  std::vector<double> near(n);
  for (std::size_t t = 0; t < n; ++t) near[t] = dist2(points, t, points, chosen[0]);
  while (chosen.size() < k) {
    double total = 0.0;
    for (double v : near) total += v;
    std::size_t next = n;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        acc += near[t];
        if (acc > r && near[t] > 0.0) {
          next = t;
          break;
        }
      }
      if (next == n) {
        // r fell into the rounding tail; take the last positive weight.
        for (std::size_t t = n; t-- > 0;) {
          if (near[t] > 0.0) {
            next = t;
            break;
          }
        }
      }
    } else {
      next = static_cast<std::size_t>(rng.below(n));
    }
    chosen.push_back(next);
    for (std::size_t t = 0; t < n; ++t) near[t] = std::min(near[t], dist2(points, t, points, next));
  }
  return chosen;
}

Matrix rows_of(const Matrix& points, const std::vector<std::size_t>& idx) {
  Matrix m(idx.size(), points.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy(points.row(idx[i]).begin(), points.row(idx[i]).end(), m.row(i).begin());
  }
  return m;
}

Matrix means_of(const Matrix& points, const std::vector<std::size_t>& label, std::size_t k) {
  Matrix c(k, points.cols(), 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t t = 0; t < points.rows(); ++t) {
    ++count[label[t]];
    for (std::size_t d = 0; d < points.cols(); ++d) c(label[t], d) += points(t, d);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (count[j] == 0) continue;
    for (std::size_t d = 0; d < points.cols(); ++d) c(j, d) /= static_cast<double>(count[j]);
  }
  return c;
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<std::size_t> build_medoids(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  std::vector<std::size_t> med;
  // With squared distances the best single medoid is the point nearest the mean.
  const Matrix mean = means_of(points, std::vector<std::size_t>(n, 0), 1);
  std::size_t first = 0;
  double best = INFINITY;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = dist2(points, t, mean, 0);
    if (d < best) {
      best = d;
      first = t;
    }
  }
  med.push_back(first);
  std::vector<double> near(n);
  for (std::size_t t = 0; t < n; ++t) near[t] = dist2(points, t, points, first);
  std::vector<char> is_med(n, 0);
  is_med[first] = 1;
  while (med.size() < k) {
    std::size_t pick = n;
    double gain_best = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_med[c]) continue;
      double gain = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double d = dist2(points, t, points, c);
        if (d < near[t]) gain += near[t] - d;
      }
      if (gain > gain_best) {
        gain_best = gain;
        pick = c;
      }
    }
    med.push_back(pick);
    is_med[pick] = 1;
    for (std::size_t t = 0; t < n; ++t) near[t] = std::min(near[t], dist2(points, t, points, pick));
  }
  return med;
}

}  // namespace

KMeansRun kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                 bool parallel) {
  check_k(points.rows(), k);
  Rng rng(seed);
  KMeansRun run;
  run.centers = rows_of(points, plusplus_seed(points, k, rng));
  std::vector<std::size_t> label, prev;
  std::vector<double> d2;
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    assign(points, run.centers, label, d2, parallel);
    repair_empty(label, d2, k, [&](std::size_t t, std::size_t j) {
      std::copy(points.row(t).begin(), points.row(t).end(), run.centers.row(j).begin());
    });
    run.history.push_back(sum_of(d2));
    run.iterations = it + 1;
    if (label == prev) break;
    prev = label;
    if (it + 1 < max_iter) run.centers = means_of(points, label, k);
  }
  run.assignment = std::move(label);
  run.wcss = run.history.back();
  return run;
}

KMedoidsRun kmedoids(const Matrix& points, std::size_t k, std::uint64_t seed,
                     std::size_t max_iter, bool build_init) {
  check_k(points.rows(), k);
  Rng rng(seed);
  KMedoidsRun run;
  run.medoids = build_init ? build_medoids(points, k) : plusplus_seed(points, k, rng);
  std::vector<std::size_t> label;
  std::vector<double> d2;
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    assign(points, rows_of(points, run.medoids), label, d2, false);
    repair_empty(label, d2, k, [&](std::size_t t, std::size_t j) { run.medoids[j] = t; });
    run.history.push_back(sum_of(d2));
    run.iterations = it + 1;
    if (it + 1 >= max_iter) break;
    // Under squared distances the in-cluster cost of a candidate medoid is
    // constant + size * |x_m - mean|^2, so the best member is the one
    // nearest the cluster mean.
    const Matrix mean = means_of(points, label, k);
    std::vector<double> cur(k, INFINITY);
    std::vector<std::size_t> next = run.medoids;
    for (std::size_t j = 0; j < k; ++j) cur[j] = dist2(points, run.medoids[j], mean, j);
    bool changed = false;
    for (std::size_t t = 0; t < points.rows(); ++t) {
      const std::size_t j = label[t];
      const double d = dist2(points, t, mean, j);
      if (d < cur[j]) {
        cur[j] = d;
        next[j] = t;
      }
    }
    for (std::size_t j = 0; j < k; ++j) changed |= next[j] != run.medoids[j];
    if (!changed) break;
    run.medoids = std::move(next);
  }
  run.assignment = std::move(label);
  run.cost = run.history.back();
  return run;
}

GmmRun gmm(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
           double tol, bool parallel) {
  check_k(points.rows(), k);
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  const KMeansRun init = kmeans(points, k, seed, max_iter, parallel);
  GmmRun run;
  GmmModel& m = run.model;
  m.k_count = k;
  m.means = means_of(points, init.assignment, k);
  m.variances = Matrix(k, dim, 0.0);
  m.weights.assign(k, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t j = init.assignment[t];
    m.weights[j] += 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = points(t, d) - m.means(j, d);
      m.variances(j, d) += diff * diff;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      m.variances(j, d) = std::max(kVarianceFloor, m.variances(j, d) / m.weights[j]);
    }
    m.weights[j] /= static_cast<double>(n);
  }

  Matrix resp;
  std::vector<double> point_ll;
  std::vector<double> log_w(k);
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    for (std::size_t j = 0; j < k; ++j) log_w[j] = std::log(m.weights[j]);
    const double ll = parallel ? kernels::estep_parallel(points, log_w, m.means, m.variances, resp,
                                                         point_ll)
                               : kernels::estep_serial(points, log_w, m.means, m.variances, resp,
                                                       point_ll);
    run.history.push_back(ll);
    run.iterations = it + 1;
    m.log_likelihood = ll;
    if (it > 0 && std::abs(ll - run.history[it - 1]) <= tol * static_cast<double>(n)) break;
    if (it + 1 >= max_iter) break;
    // M-step. Clamping each variance at the floor is the exact maximizer of
    // the floor-constrained problem, so the likelihood stays monotone.
    std::vector<double> nk(k, 0.0);
    Matrix sum(k, dim, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        const double r = resp(t, j);
        nk[j] += r;
        for (std::size_t d = 0; d < dim; ++d) sum(j, d) += r * points(t, d);
      }
    }
    Matrix sq(k, dim, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (nk[j] <= 0.0) continue;
      for (std::size_t d = 0; d < dim; ++d) sum(j, d) /= nk[j];
    }
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        const double r = resp(t, j);
        if (r == 0.0) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = points(t, d) - sum(j, d);
          sq(j, d) += r * diff * diff;
        }
      }
    }
    const double total = std::accumulate(nk.begin(), nk.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      m.weights[j] = nk[j] / total;
      if (nk[j] <= 0.0) continue;  // dead component keeps its shape, weight 0
      for (std::size_t d = 0; d < dim; ++d) {
        m.means(j, d) = sum(j, d);
        m.variances(j, d) = std::max(kVarianceFloor, sq(j, d) / nk[j]);
      }
    }
  }

  run.assignment.assign(n, 0);
  std::vector<double> d2(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (resp(t, j) > resp(t, best)) best = j;
    }
    run.assignment[t] = best;
    d2[t] = dist2(points, t, m.means, best);
  }
  repair_empty(run.assignment, d2, k, [](std::size_t, std::size_t) {});
  return run;
}

Partition cluster(const FeatureMatrix& features, std::size_t k, ClusterMethod method,
                  std::uint64_t seed, const ClusterOptions& opts) {
  const Matrix& pts = features.rows;
  const std::size_t n = pts.rows();
  check_k(n, k);
  if (opts.restarts == 0) throw Error(ErrorCode::invalid_input, "restarts must be at least 1");
  if (k == n) return singleton_partition(n);

  std::vector<std::size_t> best;
  double best_score = INFINITY;  // minimized; GMM uses -log-likelihood
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    const std::uint64_t s = derive_seed(seed, r);
    std::vector<std::size_t> label;
    double score = 0.0;
    switch (method) {
      case ClusterMethod::kmeans: {
        auto run = kmeans(pts, k, s, opts.max_iter, opts.parallel);
        score = run.wcss;
        label = std::move(run.assignment);
        break;
      }
      case ClusterMethod::kmedoids: {
        // BUILD costs O(k n^2); beyond a budget the restart uses D^2 seeding.
        const double work = static_cast<double>(k) * static_cast<double>(n) * static_cast<double>(n);
        auto run = kmedoids(pts, k, s, opts.max_iter, r == 0 && work <= 1e8);
        score = run.cost;
        label = std::move(run.assignment);
        break;
      }
      case ClusterMethod::gmm: {
        auto run = gmm(pts, k, s, opts.max_iter, opts.gmm_tol, opts.parallel);
        score = -run.model.log_likelihood;
        label = std::move(run.assignment);
        break;
      }
    }
    if (best.empty() || score < best_score) {
      best_score = score;
      best = std::move(label);
    }
  }
  Partition part = make_partition(std::move(best), k);
  validate(part, n);
  return part;
}

}  // namespace vpp
