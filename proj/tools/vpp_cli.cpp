#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vpp/data_io.hpp"
#include "vpp/error.hpp"
#include "vpp/kernels.hpp"
#include "vpp/milp.hpp"
#include "vpp/report.hpp"
#include "vpp/tsa.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vpp;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kSolverLimit = 3, kIo = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::parse_error:
      return kInvalid;
    case ErrorCode::io_failure:
      return kIo;
    default:
      return kSolverLimit;
  }
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

// Flags shared by solve and compare; unset flags leave the config value alone.
struct AlgoFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::size_t> k0;
  std::optional<std::size_t> alpha;
  std::optional<double> eps_thr;
  std::optional<std::size_t> max_iters;

  void attach(CLI::App* app, bool with_method) {
    app->add_option("--seed", seed, "Clustering seed");
    if (with_method) app->add_option("--method", method, "kmeans | kmedoids | gmm");
    app->add_option("--k0", k0, "Initial cluster count");
    app->add_option("--alpha", alpha, "Cluster growth factor");
    app->add_option("--eps-thr", eps_thr, "Target relative gap");
    app->add_option("--max-iters", max_iters, "Iteration limit");
  }

  void apply(AlgoConfig& c) const {
    if (seed) c.seed = *seed;
    if (method) c.method = parse_cluster_method(*method);
    if (k0) c.k0 = *k0;
    if (alpha) c.alpha = *alpha;
    if (eps_thr) c.eps_threshold = *eps_thr;
    if (max_iters) c.max_iters = *max_iters;
    validate(c);
  }
};

// A config file holds optional "synthetic" and "algorithm" sections.
struct ConfigFile {
  SyntheticConfig synthetic;
  AlgoConfig algorithm;
};

ConfigFile load_config(const std::string& path) {
  ConfigFile cfg;
  if (path.empty()) return cfg;
  const json j = read_json(path);
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, path + ": config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "synthetic") cfg.synthetic = synthetic_from_json(value);
    else if (key == "algorithm") cfg.algorithm = algo_from_json(value);
    else throw Error(ErrorCode::invalid_input, "unknown config key '" + key + "'");
  }
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string joined_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

void write_manifest(RunManifest m, const fs::path& out, std::chrono::steady_clock::time_point t0) {
  m.version = software_version();
  m.wall_time = seconds_since(t0);
  m.artifacts.push_back((out / "manifest.json").string());
  write_text(out / "manifest.json", to_json(m).dump(2) + "\n");
}

json milp_summary(const MilpStats& r) {
  return json{{"status", to_string(r.status)},
              {"objective", r.incumbent_value},
              {"proven_bound", r.proven_bound},
              {"root_bound", r.root_bound},
              {"gap", relative_gap(r.incumbent_value, r.proven_bound)},
              {"nodes_explored", r.nodes_explored},
              {"cut_rounds", r.cut_rounds},
              {"wall_time_s", r.wall_time}};
}

json tsa_summary(const BoundsTrace& t, double wall) {
  const IterationRecord& last = t.records.back();
  return json{{"termination", to_string(t.termination)},
              {"final_lb", t.final_lb},
              {"final_ub", t.final_ub},
              {"final_gap", last.gap},
              {"k_final", last.k_used},
              {"iterations", t.records.size()},
              {"wall_time_s", wall}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VPP investment planning with iterative time-series aggregation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may also follow the subcommand
  app.set_version_flag("--version", std::string(software_version()));

  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "Worker threads (0 keeps the OpenMP default)");
  app.add_option("--out", out_dir, "Output directory or file")->required();

  auto* gen = app.add_subcommand("generate", "Write a synthetic instance");
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--seed", gen_seed, "Generator seed");

  auto* solve = app.add_subcommand("solve", "Solve an instance at full scale or with aggregation");
  std::string solve_instance;
  std::string mode = "tsa";
  AlgoFlags solve_flags;
  solve->add_option("--instance", solve_instance, "Instance directory")->required();
  solve->add_option("--mode", mode, "full | tsa")->check(CLI::IsMember({"full", "tsa"}));
  solve_flags.attach(solve, true);

  auto* compare = app.add_subcommand("compare", "Run aggregation with several clustering methods");
  std::string cmp_instance;
  std::vector<std::string> methods{"kmeans", "kmedoids", "gmm"};
  bool baseline = false;
  bool cmp_log = false;
  AlgoFlags cmp_flags;
  compare->add_option("--instance", cmp_instance, "Instance directory")->required();
  compare->add_option("--methods", methods, "Clustering methods")->delimiter(',');
  compare->add_flag("--baseline", baseline, "Also time the full-scale solve");
  compare->add_flag("--log-scale", cmp_log, "Logarithmic objective axis");
  cmp_flags.attach(compare, false);

  auto* plot = app.add_subcommand("plot", "Render a bounds plot from trace CSV files");
  std::vector<std::string> traces;
  bool plot_log = false;
  plot->add_option("traces", traces, "Trace CSV files")->required();
  plot->add_flag("--log-scale", plot_log, "Logarithmic objective axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("invalid_input", e.what());
    return kInvalid;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = joined_argv(argc, argv);
  manifest.started_at = utc_timestamp();

  try {
    if (threads > 0) kernels::set_thread_count(threads);
    ConfigFile cfg = load_config(config_path);

    if (*gen) {
      if (gen_seed) cfg.synthetic.seed = *gen_seed;
      const ProblemInstance inst = generate_synthetic(cfg.synthetic);
      save_instance(inst, out);
      const InstanceFiles f = instance_files(out);
      manifest.config = json{{"synthetic", to_json(cfg.synthetic)}};
      manifest.seed = cfg.synthetic.seed;
      manifest.artifacts = {f.demand.string(), f.cap_factor.string(), f.generators.string(),
                            (out / "instance.json").string()};
      write_manifest(manifest, out, t0);
      std::cout << "wrote instance with " << inst.generator_count() << " generators and "
                << inst.horizon << " periods to " << out.string() << "\n";
      return kOk;
    }

    if (*solve) {
      solve_flags.apply(cfg.algorithm);
      const ProblemInstance inst = load_instance_dir(solve_instance);
      manifest.config = json{{"instance", solve_instance}, {"mode", mode},
                             {"algorithm", to_json(cfg.algorithm)}};
      manifest.seed = cfg.algorithm.seed;
      fs::create_directories(out);
      bool ok = false;
      json summary;
      if (mode == "full") {
        const FullMilpResult r = solve_full_scale(inst, cfg.algorithm.milp_opts);
        save_solution(r.incumbent_solution, out);
        summary = milp_summary(r);
        ok = r.status == MilpStatus::proved_optimal;
      } else {
        const BoundsTrace tr = run_tsa(inst, cfg.algorithm);
        save_trace(tr, out / "trace.csv");
        save_solution(tr.best_solution, out);
        manifest.artifacts.push_back((out / "trace.csv").string());
        summary = tsa_summary(tr, seconds_since(t0));
        ok = tr.termination == Termination::gap_met ||
             tr.records.back().gap <= cfg.algorithm.eps_threshold;
      }
      write_text(out / "summary.json", summary.dump(2) + "\n");
      for (const char* name : {"plan.csv", "dispatch.csv", "summary.json"}) {
        manifest.artifacts.push_back((out / name).string());
      }
      write_manifest(manifest, out, t0);
      std::cout << summary.dump(2) << "\n";
      return ok ? kOk : kSolverLimit;
    }

    if (*compare) {
      AlgoConfig base = cfg.algorithm;
      cmp_flags.apply(base);
      const ProblemInstance inst = load_instance_dir(cmp_instance);
      fs::create_directories(out / "traces");
      std::vector<ComparisonRow> rows;
      std::vector<fs::path> written;
      bool all_ok = true;
      for (const std::string& name : methods) {
        ComparisonRow row;
        row.method = name;
        const auto m0 = std::chrono::steady_clock::now();
        try {
          AlgoConfig c = base;
          c.method = parse_cluster_method(name);
          const BoundsTrace tr = run_tsa(inst, c);
          row.wall_time = seconds_since(m0);
          row.k_final = tr.records.back().k_used;
          row.iterations = tr.records.size();
          row.final_gap = tr.records.back().gap;
          row.status = to_string(tr.termination);
          all_ok &= tr.records.back().gap <= c.eps_threshold;
          const fs::path p = out / "traces" / (name + ".csv");
          save_trace(tr, p);
          written.push_back(p);
        } catch (const Error& e) {
          // recorded in the table; the remaining methods still run
          row.wall_time = seconds_since(m0);
          row.status = std::string("error: ") + to_string(e.code()) + ": " + e.what();
          all_ok = false;
        }
        rows.push_back(row);
      }
      if (baseline) {
        const FullMilpResult r = solve_full_scale(inst, base.milp_opts);
        ComparisonRow row;
        row.method = "full-scale";
        row.k_final = inst.horizon;
        row.iterations = 1;
        row.final_gap = relative_gap(r.incumbent_value, r.proven_bound);
        row.wall_time = r.wall_time;
        row.status = to_string(r.status);
        rows.push_back(row);
        set_relative_times(rows, r.wall_time);
      }
      write_text(out / "comparison.csv", comparison_csv(rows));
      PlotOptions po;
      po.log_scale = cmp_log;
      write_text(out / "bounds.svg", bounds_svg(load_series(written), po));
      manifest.config = json{{"instance", cmp_instance}, {"methods", methods},
                             {"baseline", baseline}, {"log_scale", cmp_log},
                             {"algorithm", to_json(base)}};
      manifest.seed = base.seed;
      for (const auto& p : written) manifest.artifacts.push_back(p.string());
      manifest.artifacts.push_back((out / "comparison.csv").string());
      manifest.artifacts.push_back((out / "bounds.svg").string());
      write_manifest(manifest, out, t0);
      std::cout << comparison_csv(rows);
      return all_ok ? kOk : kSolverLimit;
    }

    if (*plot) {
      std::vector<fs::path> paths(traces.begin(), traces.end());
      PlotOptions po;
      po.log_scale = plot_log;
      write_text(out, bounds_svg(load_series(paths), po));
      return kOk;
    }
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    print_error("io_failure", e.what());
    return kIo;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kSolverLimit;
  }
  return kOk;
}
