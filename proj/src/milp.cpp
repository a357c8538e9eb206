#include "vpp/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "vpp/dispatch.hpp"
#include "vpp/error.hpp"
#include "vpp/kernels.hpp"
#include "vpp/lp.hpp"

namespace vpp {

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::proved_optimal: return "proved_optimal";
    case MilpStatus::gap_limit: return "gap_limit";
    case MilpStatus::node_limit: return "node_limit";
    case MilpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

const char* to_string(Branching branching) {
  return branching == Branching::most_violated ? "most_violated" : "lowest_index";
}

const char* to_string(Search search) {
  return search == Search::best_bound ? "best_bound" : "depth_first";
}

Branching parse_branching(const std::string& text) {
  if (text == "most_violated") return Branching::most_violated;
  if (text == "lowest_index") return Branching::lowest_index;
  throw Error(ErrorCode::invalid_input, "unknown branching rule '" + text + "'");
}

Search parse_search(const std::string& text) {
  if (text == "best_bound") return Search::best_bound;
  if (text == "depth_first") return Search::depth_first;
  throw Error(ErrorCode::invalid_input, "unknown search order '" + text + "'");
}

void validate(const MilpOptions& opts) {
  if (!(opts.mip_tol > 0.0)) throw Error(ErrorCode::invalid_input, "mip_tol must be positive");
  if (!(opts.lp_tol > 0.0)) throw Error(ErrorCode::invalid_input, "lp_tol must be positive");
  if (opts.node_limit == 0) throw Error(ErrorCode::invalid_input, "node_limit must be at least 1");
  if (opts.max_cut_rounds == 0) {
    throw Error(ErrorCode::invalid_input, "max_cut_rounds must be at least 1");
  }
}

double relative_gap(double incumbent, double bound) {
  return (incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cut {
  double intercept = 0.0;
  std::vector<double> slope;
};

struct Node {
  std::vector<double> lo, hi;
  double bound = -kInf;
  std::vector<std::size_t> cuts;  // pool indices inherited from the parent
  std::size_t id = 0;
};

struct NodeOutcome {
  double bound = -kInf;
  std::vector<double> point;  // best evaluated relaxation point
  std::vector<std::size_t> binding;
};

// Search over a PeriodData with objective scaled by `scale_` so that the
// master LP works with O(1) numbers.
class BranchAndBound {
 public:
  BranchAndBound(const std::vector<GeneratorSpec>& gens, kernels::PeriodData data,
                 const MilpOptions& opt)
      : gens_(gens), data_(std::move(data)), opt_(opt), G_(gens.size()) {
    std::vector<double> zero(G_, 0.0);
    kernels::recourse_parallel(data_, zero, scratch_, probe_);
    scale_ = std::max(1.0, probe_.value);
    cost_.resize(G_);
    for (std::size_t g = 0; g < G_; ++g) cost_[g] = gens[g].inv_cost / scale_;
    kernel_tol_ = 0.1 * opt_.mip_tol;
  }

  MilpStats run(std::vector<double>& best_capacity) {
    const auto t0 = std::chrono::steady_clock::now();
    MilpStats stats;

    Node root;
    root.lo.assign(G_, 0.0);
    root.hi.resize(G_);
    for (std::size_t g = 0; g < G_; ++g) root.hi[g] = gens_[g].cap_max;
    try_incumbent(root.lo);
    try_incumbent(root.hi);
    root.cuts.push_back(add_cut(root.lo));
    root.cuts.push_back(add_cut(root.hi));

    auto worse = [&](const Node& a, const Node& b) {
      if (a.bound != b.bound) return a.bound > b.bound;
      return a.id > b.id;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> heap(worse);
    std::vector<Node> stack;
    auto push = [&](Node n) {
      n.id = next_id_++;
      if (opt_.search == Search::best_bound) heap.push(std::move(n));
      else stack.push_back(std::move(n));
    };
    auto pop = [&]() {
      Node n;
      if (opt_.search == Search::best_bound) {
        n = heap.top();
        heap.pop();
      } else {
        n = std::move(stack.back());
        stack.pop_back();
      }
      return n;
    };
    auto open_count = [&]() {
      return opt_.search == Search::best_bound ? heap.size() : stack.size();
    };

    double closed_min = kInf;
    push(std::move(root));
    bool first = true;
    while (open_count() > 0) {
      if (stats.nodes_explored >= opt_.node_limit) break;
      Node node = pop();
      if (prunable(node.bound)) {
        closed_min = std::min(closed_min, node.bound);
        continue;
      }
      NodeOutcome out = solve_node(node);
      ++stats.nodes_explored;
      node.bound = std::max(node.bound, out.bound);
      if (first) {
        stats.root_bound = node.bound * scale_;
        first = false;
      }
      heuristics(out.point);
      const std::size_t g = pick_branch(node, out.point);
      if (g == G_ || prunable(node.bound)) {
        closed_min = std::min(closed_min, node.bound);
        continue;
      }
      Node down;
      down.lo = node.lo;
      down.hi = node.hi;
      down.hi[g] = 0.0;
      down.bound = node.bound;
      down.cuts = out.binding;
      Node up;
      up.lo = node.lo;
      up.hi = node.hi;
      up.lo[g] = gens_[g].cap_min;
      up.bound = node.bound;
      up.cuts = std::move(out.binding);
      // Depth-first pops the last push, so the up branch (usually the one
      // holding the incumbent region) goes first.
      push(std::move(down));
      push(std::move(up));
    }

    double open_min = kInf;
    if (opt_.search == Search::best_bound) {
      if (!heap.empty()) open_min = heap.top().bound;
    } else {
      for (const Node& n : stack) open_min = std::min(open_min, n.bound);
    }
    const bool exhausted = open_count() == 0;
    stats.cut_rounds = rounds_;
    stats.incumbent_value = incumbent_ * scale_;
    stats.proven_bound = std::min({stats.incumbent_value, closed_min * scale_, open_min * scale_});
    const bool gap_ok = relative_gap(stats.incumbent_value, stats.proven_bound) <= opt_.mip_tol;
    if (exhausted) stats.status = gap_ok ? MilpStatus::proved_optimal : MilpStatus::gap_limit;
    else stats.status = gap_ok ? MilpStatus::gap_limit : MilpStatus::node_limit;
    stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best_capacity = incumbent_x_;
    return stats;
  }

  double scale() const { return scale_; }

 private:
  bool prunable(double bound) const {
    return relative_gap(incumbent_ * scale_, bound * scale_) <= opt_.mip_tol;
  }

  // Objective at x (scaled) and the cut supporting Q there.
  double evaluate(const std::vector<double>& x, Cut* cut) {
    kernels::recourse_parallel(data_, x, scratch_, probe_);
    double inv = 0.0;
    for (std::size_t g = 0; g < G_; ++g) inv += cost_[g] * x[g];
    if (cut) {
      cut->intercept = probe_.intercept / scale_;
      cut->slope.resize(G_);
      for (std::size_t g = 0; g < G_; ++g) cut->slope[g] = probe_.slope[g] / scale_;
    }
    return inv + probe_.value / scale_;
  }

  std::size_t add_cut(const std::vector<double>& x) {
    Cut cut;
    evaluate(x, &cut);
    pool_.push_back(std::move(cut));
    return pool_.size() - 1;
  }

  std::vector<double> snap(const std::vector<double>& x, bool round_up) const {
    std::vector<double> s(G_);
    for (std::size_t g = 0; g < G_; ++g) {
      const auto& spec = gens_[g];
      const double v = x[g];
      const double eps = 1e-9 * std::max(1.0, spec.cap_max);
      if (v <= eps || spec.cap_max <= 0.0) s[g] = 0.0;
      else if (!round_up && v < 0.5 * spec.cap_min) s[g] = 0.0;
      else s[g] = std::clamp(v, spec.cap_min, spec.cap_max);
    }
    return s;
  }

  void try_incumbent(const std::vector<double>& x) {
    const double f = evaluate(x, nullptr);
    if (f < incumbent_) {
      incumbent_ = f;
      incumbent_x_ = x;
    }
  }

  void heuristics(const std::vector<double>& x) {
    const auto a = snap(x, false);
    try_incumbent(a);
    const auto b = snap(x, true);
    if (b != a) try_incumbent(b);
  }

  std::size_t pick_branch(const Node& node, const std::vector<double>& x) const {
    std::size_t best = G_;
    double best_score = kInf;
    for (std::size_t g = 0; g < G_; ++g) {
      const auto& spec = gens_[g];
      if (node.lo[g] > 0.0 || node.hi[g] <= 0.0) continue;
      const double eps = 1e-9 * std::max(1.0, spec.cap_max);
      if (!(x[g] > eps && x[g] < spec.cap_min - eps)) continue;
      if (opt_.branching == Branching::lowest_index) return g;
      const double score = std::abs(x[g] - 0.5 * spec.cap_min);
      if (score < best_score) {
        best_score = score;
        best = g;
      }
    }
    return best;
  }

  // Kelley's method on the node box.
  NodeOutcome solve_node(const Node& node) {
    NodeOutcome out;
    std::vector<std::size_t> active = node.cuts;
    if (active.empty()) active.push_back(add_cut(node.hi));
    double best_f = kInf;
    lp::LpOptions lpo;
    lpo.tol = opt_.lp_tol;
    std::vector<double> x(G_);
    std::vector<double> last_dual;
    for (std::size_t round = 0; round < opt_.max_cut_rounds; ++round) {
      ++rounds_;
      lp::LpProblem master;
      for (std::size_t g = 0; g < G_; ++g) master.add_column(cost_[g], node.lo[g], node.hi[g]);
      const std::size_t theta = master.add_column(1.0, 0.0, lp::kInf);
      for (std::size_t j : active) {
        const Cut& c = pool_[j];
        std::vector<std::size_t> idx;
        std::vector<double> val;
        for (std::size_t g = 0; g < G_; ++g) {
          if (c.slope[g] != 0.0) {
            idx.push_back(g);
            val.push_back(c.slope[g]);
          }
        }
        idx.push_back(theta);
        val.push_back(1.0);
        master.add_row(std::move(idx), std::move(val), lp::RowSense::greater_equal, c.intercept);
      }
      const lp::LpSolution sol = lp::solve_lp(master, lpo);
      if (sol.status != lp::LpStatus::optimal) break;
      out.bound = std::max(out.bound, certificate(node, active, sol.dual));
      last_dual = sol.dual;
      std::copy_n(sol.primal.begin(), G_, x.begin());
      Cut cut;
      const double f = evaluate(x, &cut);
      if (f < best_f) {
        best_f = f;
        out.point = x;
      }
      if (best_f - out.bound <= kernel_tol_ * std::max(1.0 / scale_, std::abs(best_f))) break;
      if (prunable(out.bound)) break;
      // The new cut must cut off the current master point; otherwise the LP
      // tolerance is the limit and further rounds cannot help.
      const double lp_val = sol.objective_value;
      if (f - lp_val <= 1e-12 * std::max(1.0, std::abs(f))) break;
      pool_.push_back(std::move(cut));
      active.push_back(pool_.size() - 1);
      last_dual.clear();
    }
    if (out.point.empty()) {
      out.point = node.hi;
      evaluate(out.point, nullptr);
    }
    for (std::size_t i = 0; i < last_dual.size(); ++i) {
      if (last_dual[i] > 0.0) out.binding.push_back(active[i]);
    }
    if (out.binding.empty()) out.binding = active;
    return out;
  }

  // Lagrangian bound from multipliers pi >= 0 with sum(pi) <= 1:
  //   sum_j pi_j a_j + min over the box of sum_g (c_g - sum_j pi_j b_jg) x_g.
  // Valid for any such pi, so rounding in the LP duals cannot overstate it.
  double certificate(const Node& node, const std::vector<std::size_t>& active,
                     const std::vector<double>& dual) const {
    std::vector<double> pi(active.size());
    double total = 0.0;
    for (std::size_t j = 0; j < active.size(); ++j) {
      pi[j] = std::max(0.0, dual[j]);
      total += pi[j];
    }
    if (total > 1.0) {
      for (double& p : pi) p /= total;
    }
    double bound = 0.0;
    std::vector<double> reduced(cost_);
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (pi[j] == 0.0) continue;
      const Cut& c = pool_[active[j]];
      bound += pi[j] * c.intercept;
      for (std::size_t g = 0; g < G_; ++g) reduced[g] -= pi[j] * c.slope[g];
    }
    for (std::size_t g = 0; g < G_; ++g) {
      bound += std::min(node.lo[g] * reduced[g], node.hi[g] * reduced[g]);
    }
    return bound;
  }

  const std::vector<GeneratorSpec>& gens_;
  kernels::PeriodData data_;
  MilpOptions opt_;
  std::size_t G_;
  double scale_ = 1.0;
  double kernel_tol_ = 1e-7;
  std::vector<double> cost_;
  std::vector<Cut> pool_;
  kernels::RecourseScratch scratch_;
  kernels::RecourseCut probe_;
  double incumbent_ = kInf;
  std::vector<double> incumbent_x_;
  std::size_t next_id_ = 0;
  std::size_t rounds_ = 0;
};

InvestmentPlan plan_of(const std::vector<double>& capacity) { return plan_from_capacity(capacity); }

}  // namespace

FullMilpResult solve_full_scale(const ProblemInstance& instance, const MilpOptions& opts) {
  validate(opts);
  validate(instance);
  const auto t0 = std::chrono::steady_clock::now();
  BranchAndBound bb(instance.generators, kernels::make_period_data(instance), opts);
  std::vector<double> capacity;
  FullMilpResult result;
  static_cast<MilpStats&>(result) = bb.run(capacity);
  result.incumbent_plan = plan_of(capacity);
  UpperBound ub = compute_upper_bound(instance, result.incumbent_plan);
  result.incumbent_solution = std::move(ub.solution);
  result.incumbent_value = ub.value;
  result.proven_bound = std::min(result.proven_bound, result.incumbent_value);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

AggregatedMilpResult solve_aggregated(const AggregatedInstance& agg, const MilpOptions& opts) {
  validate(opts);
  if (agg.k_count == 0 || agg.weights.size() != agg.k_count ||
      agg.avg_demand.size() != agg.k_count || agg.avg_cap_factor.rows() != agg.generator_count() ||
      agg.avg_cap_factor.cols() != agg.k_count) {
    throw Error(ErrorCode::dimension_mismatch, "aggregated instance arrays are inconsistent");
  }
  const auto t0 = std::chrono::steady_clock::now();
  BranchAndBound bb(agg.generators, kernels::make_period_data(agg), opts);
  std::vector<double> capacity;
  AggregatedMilpResult result;
  static_cast<MilpStats&>(result) = bb.run(capacity);
  result.incumbent_plan = plan_of(capacity);
  result.incumbent_solution = dispatch_aggregated(agg, result.incumbent_plan);
  result.incumbent_value = evaluate_aggregated_objective(agg, result.incumbent_solution);
  result.proven_bound = std::min(result.proven_bound, result.incumbent_value);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace vpp
