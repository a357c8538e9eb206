// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracle.hpp"
#include "vpp/clustering.hpp"
#include "vpp/data_io.hpp"
#include "vpp/dispatch.hpp"
#include "vpp/milp.hpp"
#include "vpp/model.hpp"
#include "vpp/report.hpp"
#include "vpp/tsa.hpp"

namespace fs = std::filesystem;
using namespace vpp;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& run,
            double limit = 0.0) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("threw: ") + e.what();
  }
  const double seconds = since(t0);
  if (limit > 0.0 && seconds > limit) {
    o.pass = false;
    o.detail += fmt(", over the %.0fs budget", limit);
  }
  std::printf("criterion %d %-28s %s  (%.1fs) %s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL",
              seconds, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

constexpr ClusterMethod kMethods[] = {ClusterMethod::kmeans, ClusterMethod::kmedoids,
                                      ClusterMethod::gmm};

// Shared by criteria 2 to 5.
std::vector<ProblemInstance> oracle_instances() {
  std::vector<ProblemInstance> out;
  for (std::uint64_t s = 1; s <= 10; ++s) out.push_back(oracle::random_instance(8, 96, s));
  return out;
}

Outcome criterion1() {
  Rng rng(20240101);
  std::size_t checked = 0, bad_feas = 0, bad_obj = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ProblemInstance inst = oracle::random_small_instance(rng, 3, 10, 8, 64);
    for (int j = 0; j < 50; ++j) {
      const FullSolution sol = oracle::random_feasible_solution(inst, rng);
      const std::size_t k = 1 + rng.below(inst.horizon);
      const Partition part = oracle::random_partition(inst.horizon, k, rng);
      const AggregatedInstance agg = build_aggregated_instance(inst, part);
      const AggregatedSolution mapped = map_full_to_aggregated(sol, part);
      if (!check_feasibility(inst, sol).empty()) ++bad_feas;  // generator sanity
      if (!check_feasibility(agg, mapped, 1e-7).empty()) ++bad_feas;
      const double j_full = evaluate_full_objective(inst, sol);
      const double j_agg = evaluate_aggregated_objective(agg, mapped);
      const double e = rel(j_agg, j_full);
      worst = std::max(worst, e);
      if (e > 1e-9) ++bad_obj;
      ++checked;
    }
  }
  Outcome o;
  o.pass = checked == 1000 && bad_feas == 0 && bad_obj == 0;
  o.detail = std::to_string(checked) + " maps, infeasible " + std::to_string(bad_feas) +
             ", objective mismatches " + std::to_string(bad_obj) + fmt(", worst rel %.2e", worst);
  return o;
}

Outcome criterion2(const std::vector<ProblemInstance>& insts, std::vector<double>& optimum) {
  Outcome o;
  double worst = 0.0;
  for (const auto& inst : insts) {
    const auto truth = oracle::enumerate(inst);
    const auto r = solve_full_scale(inst);
    optimum.push_back(truth.value);
    const double e = std::abs(r.incumbent_value - truth.value) / std::max(1.0, std::abs(truth.value));
    worst = std::max(worst, e);
    if (e > 1e-6 || r.status != MilpStatus::proved_optimal) o.pass = false;
  }
  o.detail = fmt("worst rel diff %.2e over 10 instances", worst);
  return o;
}

// Anytime feasibility bookkeeping for criterion 5.
struct AnytimeCheck {
  std::size_t iterations = 0;
  std::size_t failures = 0;
  double worst = 0.0;

  IterationObserver observer() {
    return [this](const IterationRecord& rec, const BoundsTrace& tr) {
      ++iterations;
      const bool feasible = check_feasibility_ok(tr);
      const double e = rel(evaluate_full_objective(instance, tr.best_solution), rec.ub);
      worst = std::max(worst, e);
      if (!feasible || e > 1e-9) ++failures;
    };
  }

  bool check_feasibility_ok(const BoundsTrace& tr) const {
    return check_feasibility(instance, tr.best_solution, 1e-7).empty();
  }

  ProblemInstance instance;
};

Outcome criterion3(const std::vector<ProblemInstance>& insts, const std::vector<double>& optimum,
                   AnytimeCheck& anytime) {
  Outcome o;
  if (optimum.size() != insts.size()) return {false, "oracle optima unavailable"};
  std::size_t runs = 0, iters = 0;
  double worst_gap = 0.0;
  std::string first_issue;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const double star = optimum[i];
    const double slack = 1e-7 * std::max(1.0, std::abs(star));
    anytime.instance = insts[i];
    for (ClusterMethod m : kMethods) {
      AlgoConfig cfg;
      cfg.method = m;
      cfg.seed = i;
      const BoundsTrace tr = run_tsa(insts[i], cfg, anytime.observer());
      ++runs;
      for (std::size_t r = 0; r < tr.records.size(); ++r) {
        const auto& rec = tr.records[r];
        ++iters;
        bool ok = rec.lb <= star + slack && star <= rec.ub + slack;
        if (r > 0) ok &= rec.lb >= tr.records[r - 1].lb && rec.ub <= tr.records[r - 1].ub;
        if (!ok && first_issue.empty()) {
          first_issue = " first violation: instance " + std::to_string(i) + " " + to_string(m) +
                        " iter " + std::to_string(r);
        }
        o.pass &= ok;
      }
      worst_gap = std::max(worst_gap, tr.records.back().gap);
      o.pass &= tr.records.back().gap <= 0.01;
    }
  }
  o.detail = std::to_string(runs) + " runs, " + std::to_string(iters) + " iterations" +
             fmt(", worst final gap %.4f", worst_gap) + first_issue;
  return o;
}

Outcome criterion4(const std::vector<ProblemInstance>& insts, AnytimeCheck& anytime) {
  Outcome o;
  double worst = 0.0;
  for (const auto& inst : insts) {
    anytime.instance = inst;
    AlgoConfig cfg;
    cfg.k0 = inst.horizon;
    const BoundsTrace tr = run_tsa(inst, cfg, anytime.observer());
    worst = std::max(worst, tr.records.back().gap);
    o.pass &= tr.records.size() == 1 && tr.records.back().gap <= 1e-6;
  }
  o.detail = fmt("worst gap %.2e, one iteration each", worst);
  return o;
}

Outcome criterion5(const AnytimeCheck& anytime) {
  Outcome o;
  o.pass = anytime.iterations > 0 && anytime.failures == 0;
  o.detail = std::to_string(anytime.iterations) + " iterations checked, " +
             std::to_string(anytime.failures) + fmt(" failures, worst UB rel diff %.2e", anytime.worst);
  return o;
}

Outcome criterion6() {
  Rng rng(6);
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ProblemInstance inst;
    const std::size_t G = 1 + rng.below(12);
    inst.horizon = 1;
    inst.delta = rng.uniform(0.25, 2.0);
    inst.ns_cost = rng.uniform(500.0, 6000.0);
    inst.cap_factor = Matrix(G, 1);
    std::vector<double> cap(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
      GeneratorSpec s;
      s.id = g;
      // a few repeated costs exercise ties
      s.op_cost = rng.uniform() < 0.2 ? 50.0 : rng.uniform(0.0, 120.0);
      s.cap_min = 0.1;
      s.cap_max = 1.0;
      inst.generators.push_back(s);
      inst.cap_factor(g, 0) = rng.uniform();
      if (rng.uniform() < 0.7) cap[g] = rng.uniform(0.1, 1.0);
    }
    inst.demand = {rng.uniform(0.0, 1.2 * static_cast<double>(G))};
    const PeriodDispatch d = dispatch_period(inst, cap, 0);
    const auto lp_sol = lp::solve_lp(oracle::period_lp(inst, cap, 0));
    if (lp_sol.status != lp::LpStatus::optimal) {
      o.pass = false;
      continue;
    }
    const double e = std::abs(d.cost - lp_sol.objective_value);
    worst = std::max(worst, e / std::max(1.0, std::abs(lp_sol.objective_value)));
    if (e > 1e-8 * std::max(1.0, std::abs(lp_sol.objective_value))) o.pass = false;
  }
  o.detail = fmt("1000 periods, worst rel diff %.2e", worst);
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::size_t runs = 0;
  std::vector<Matrix> inputs;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    inputs.push_back(build_features(oracle::random_instance(8, 96, s)).rows);
    inputs.push_back(build_features(oracle::random_instance(10, 300, s), Scaling::zscore,
                                    FeatureSet::full).rows);
  }
  auto nonincreasing = [](const std::vector<double>& h) {
    for (std::size_t i = 1; i < h.size(); ++i) {
      if (h[i] > h[i - 1] + 1e-9 * std::max(1.0, std::abs(h[i - 1]))) return false;
    }
    return true;
  };
  auto nondecreasing = [](const std::vector<double>& h) {
    for (std::size_t i = 1; i < h.size(); ++i) {
      if (h[i] < h[i - 1] - 1e-9 * std::max(1.0, std::abs(h[i - 1]))) return false;
    }
    return true;
  };
  for (const Matrix& pts : inputs) {
    for (std::size_t k : {2u, 5u, 12u}) {
      for (std::uint64_t seed : {1u, 2u}) {
        const auto km = kmeans(pts, k, seed, 300);
        const auto gm = gmm(pts, k, seed, 300);
        const auto md = kmedoids(pts, k, seed, 300, seed == 1);
        o.pass &= nonincreasing(km.history) && nondecreasing(gm.history) &&
                  nonincreasing(md.history);
        // reproducibility
        o.pass &= kmeans(pts, k, seed, 300).assignment == km.assignment;
        o.pass &= gmm(pts, k, seed, 300).assignment == gm.assignment;
        o.pass &= kmedoids(pts, k, seed, 300, seed == 1).assignment == md.assignment;
        FeatureMatrix fm;
        fm.rows = pts;
        for (ClusterMethod m : kMethods) {
          o.pass &= cluster(fm, k, m, seed).assignment == cluster(fm, k, m, seed).assignment;
        }
        runs += 3;
      }
    }
  }
  o.detail = std::to_string(runs) + " single runs checked";
  return o;
}

Outcome criterion8(const fs::path& out) {
  SyntheticConfig sc;
  sc.n_generators = 20;
  sc.n_periods = 2190;
  sc.seed = 1;
  const ProblemInstance inst = generate_synthetic(sc);
  Outcome o;
  std::vector<ComparisonRow> rows;
  std::vector<fs::path> traces;
  fs::create_directories(out / "traces");
  std::string ks;
  for (ClusterMethod m : kMethods) {
    AlgoConfig cfg;
    cfg.method = m;
    cfg.seed = 1;
    const auto t0 = Clock::now();
    const BoundsTrace tr = run_tsa(inst, cfg);
    ComparisonRow row;
    row.method = to_string(m);
    row.wall_time = since(t0);
    row.k_final = tr.records.back().k_used;
    row.iterations = tr.records.size();
    row.final_gap = tr.records.back().gap;
    row.status = to_string(tr.termination);
    rows.push_back(row);
    o.pass &= row.final_gap <= 0.01 && row.k_final * 4 <= inst.horizon;
    ks += std::string(ks.empty() ? "" : ", ") + row.method + " K=" + std::to_string(row.k_final);
    const fs::path p = out / "traces" / (row.method + ".csv");
    save_trace(tr, p);
    traces.push_back(p);
  }
  write_text(out / "comparison.csv", comparison_csv(rows));
  write_text(out / "bounds.svg", bounds_svg(load_series(traces)));
  o.pass &= fs::file_size(out / "comparison.csv") > 0 && fs::file_size(out / "bounds.svg") > 0;
  o.detail = ks + " (limit " + std::to_string(inst.horizon / 4) + ")";
  return o;
}

// Reported, not asserted.
void timing_ratio(const fs::path& out) {
  SyntheticConfig sc;
  sc.n_generators = 50;
  sc.n_periods = 8760;
  sc.seed = 1;
  const ProblemInstance inst = generate_synthetic(sc);
  const FullMilpResult full = solve_full_scale(inst);
  std::vector<ComparisonRow> rows;
  for (ClusterMethod m : kMethods) {
    AlgoConfig cfg;
    cfg.method = m;
    cfg.seed = 1;
    const auto t0 = Clock::now();
    const BoundsTrace tr = run_tsa(inst, cfg);
    ComparisonRow row;
    row.method = to_string(m);
    row.wall_time = since(t0);
    row.k_final = tr.records.back().k_used;
    row.iterations = tr.records.size();
    row.final_gap = tr.records.back().gap;
    row.status = to_string(tr.termination);
    rows.push_back(row);
  }
  ComparisonRow fs_row;
  fs_row.method = "full-scale";
  fs_row.k_final = inst.horizon;
  fs_row.iterations = 1;
  fs_row.final_gap = relative_gap(full.incumbent_value, full.proven_bound);
  fs_row.wall_time = full.wall_time;
  fs_row.status = to_string(full.status);
  rows.push_back(fs_row);
  set_relative_times(rows, full.wall_time);
  write_text(out / "timing_g50_t8760.csv", comparison_csv(rows));
  for (const auto& r : rows) {
    std::printf("  info: |G|=50 |T|=8760 %-10s K=%-5zu wall %.2fs relative %.3f\n",
                r.method.c_str(), r.k_final, r.wall_time, r.relative_time);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string out = "acceptance_out";
  bool skip_ratio = false;
  app.add_option("--out", out, "Directory for the comparison table and plot");
  app.add_flag("--skip-ratio", skip_ratio, "Skip the reported |G|=50, |T|=8760 timing run");
  CLI11_PARSE(app, argc, argv);

  report(1, "mapping-preserves-objective", criterion1, 30.0);

  const auto insts = oracle_instances();
  std::vector<double> optimum;
  report(2, "milp-matches-enumeration", [&] { return criterion2(insts, optimum); }, 120.0);

  AnytimeCheck anytime;
  report(3, "bound-sandwich", [&] { return criterion3(insts, optimum, anytime); });
  report(4, "identity-aggregation", [&] { return criterion4(insts, anytime); });
  report(5, "anytime-feasibility", [&] { return criterion5(anytime); });
  report(6, "dispatch-matches-lp", criterion6, 10.0);
  report(7, "clustering-monotone", criterion7);
  report(8, "desk-scale-convergence", [&] { return criterion8(out); });

  if (!skip_ratio) timing_ratio(out);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
