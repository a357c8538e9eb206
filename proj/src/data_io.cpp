#include "vpp/data_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vpp/error.hpp"
#include "vpp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vpp {

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::per_generator: return "per_generator";
    case Normalization::global: return "global";
    case Normalization::clip: return "clip";
  }
  return "unknown";
}

Normalization parse_normalization(const std::string& text) {
  if (text == "per_generator") return Normalization::per_generator;
  if (text == "global") return Normalization::global;
  if (text == "clip") return Normalization::clip;
  throw Error(ErrorCode::invalid_input, "unknown normalization '" + text + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void validate(const SyntheticConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_input, what); };
  if (c.n_generators == 0) fail("n_generators must be at least 1");
  if (c.n_periods == 0) fail("n_periods must be at least 1");
  if (!(c.thermal_share >= 0.0 && c.thermal_share <= 1.0)) fail("thermal_share must lie in [0, 1]");
  if (!(c.lognormal_sigma > 0.0)) fail("lognormal_sigma must be positive");
  if (!(c.demand_upper_divisor > 0.0)) fail("demand_upper_divisor must be positive");
  if (!(c.delta > 0.0)) fail("delta must be positive");
  if (!(c.cap_min >= 0.0 && c.cap_min <= c.cap_max)) fail("need 0 <= cap_min <= cap_max");
  for (double v : {c.thermal_inv_cost, c.renewable_inv_cost, c.thermal_op_cost,
                   c.renewable_op_cost, c.ns_cost}) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail("costs must be finite and non-negative");
  }
}

std::size_t thermal_count(double share, std::size_t n) {
  return static_cast<std::size_t>(std::floor(share * static_cast<double>(n) + 0.5));
}

ProblemInstance generate_synthetic(const SyntheticConfig& c) {
  validate(c);
  const std::size_t G = c.n_generators;
  const std::size_t T = c.n_periods;
  const std::size_t thermal = std::min(G, thermal_count(c.thermal_share, G));
  Rng rng(c.seed);
  ProblemInstance inst;
  inst.horizon = T;
  inst.delta = c.delta;
  inst.ns_cost = c.ns_cost;
  inst.cap_factor = Matrix(G, T, 1.0);
  for (std::size_t g = 0; g < G; ++g) {
    const bool is_thermal = g < thermal;
    GeneratorSpec s;
    s.id = g;
    s.kind = is_thermal ? GeneratorKind::thermal : GeneratorKind::renewable;
    s.inv_cost = is_thermal ? c.thermal_inv_cost : c.renewable_inv_cost;
    s.op_cost = is_thermal ? c.thermal_op_cost : c.renewable_op_cost;
    s.cap_min = c.cap_min;
    s.cap_max = c.cap_max;
    inst.generators.push_back(s);
    if (is_thermal) continue;
    for (std::size_t t = 0; t < T; ++t) {
      inst.cap_factor(g, t) = std::exp(rng.normal(c.lognormal_mu, c.lognormal_sigma));
    }
  }
  double global_max = 0.0;
  for (std::size_t g = thermal; g < G; ++g) {
    for (double v : inst.cap_factor.row(g)) global_max = std::max(global_max, v);
  }
  for (std::size_t g = thermal; g < G; ++g) {
    auto row = inst.cap_factor.row(g);
    double top = 0.0;
    for (double v : row) top = std::max(top, v);
    for (double& v : row) {
      switch (c.normalization) {
        case Normalization::per_generator: v /= top; break;
        case Normalization::global: v /= global_max; break;
        case Normalization::clip: v = std::min(v, 1.0); break;
      }
    }
  }
  inst.demand.resize(T);
  const double hi = static_cast<double>(G) / c.demand_upper_divisor;
  for (double& d : inst.demand) d = rng.uniform(0.0, hi);
  validate(inst);
  return inst;
}

namespace {

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

[[noreturn]] void parse_fail(const std::string& file, std::size_t row, std::size_t col,
                             const std::string& what) {
  throw Error(ErrorCode::parse_error, file + ": row " + std::to_string(row) + ", column " +
                                          std::to_string(col) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  CsvTable t;
  t.file = path.string();
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      t.header = split(line);
      first = false;
    } else {
      t.rows.push_back(split(line));
    }
  }
  if (first) throw Error(ErrorCode::parse_error, t.file + ": missing header");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      parse_fail(t.file, r + 1, t.rows[r].size() + 1,
                 "expected " + std::to_string(t.header.size()) + " fields");
    }
  }
  return t;
}

double cell_double(const CsvTable& t, std::size_t r, std::size_t c) {
  const std::string& s = t.rows[r][c];
  if (s.empty()) parse_fail(t.file, r + 1, c + 1, "empty field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    parse_fail(t.file, r + 1, c + 1, "not a finite number: '" + s + "'");
  }
  return v;
}

std::size_t cell_index(const CsvTable& t, std::size_t r, std::size_t c) {
  const double v = cell_double(t, r, c);
  if (v < 0.0 || v != std::floor(v)) parse_fail(t.file, r + 1, c + 1, "not an index");
  return static_cast<std::size_t>(v);
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want) {
  if (t.header != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw Error(ErrorCode::parse_error, t.file + ": header must be '" + joined + "'");
  }
}

void expect_period_column(const CsvTable& t) {
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (cell_index(t, r, 0) != r) parse_fail(t.file, r + 1, 1, "periods must ascend from 0");
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
}

std::vector<std::string> generator_columns(std::size_t G, const std::string& prefix) {
  std::vector<std::string> cols;
  for (std::size_t g = 0; g < G; ++g) cols.push_back(prefix + std::to_string(g));
  return cols;
}

}  // namespace

InstanceFiles instance_files(const fs::path& dir) {
  return {dir / "demand.csv", dir / "cap_factor.csv", dir / "generators.csv"};
}

ProblemInstance load_instance(const InstanceFiles& files, double delta, double ns_cost) {
  const CsvTable dem = read_csv(files.demand);
  const CsvTable cf = read_csv(files.cap_factor);
  const CsvTable gen = read_csv(files.generators);
  expect_header(dem, {"t", "demand_mwh"});
  expect_header(gen, {"id", "kind", "inv_cost", "op_cost", "cap_min", "cap_max"});

  ProblemInstance inst;
  inst.delta = delta;
  inst.ns_cost = ns_cost;
  for (std::size_t r = 0; r < gen.rows.size(); ++r) {
    GeneratorSpec s;
    s.id = cell_index(gen, r, 0);
    if (s.id != r) parse_fail(gen.file, r + 1, 1, "generator ids must ascend from 0");
    try {
      s.kind = parse_generator_kind(gen.rows[r][1]);
    } catch (const Error& e) {
      parse_fail(gen.file, r + 1, 2, e.what());
    }
    s.inv_cost = cell_double(gen, r, 2);
    s.op_cost = cell_double(gen, r, 3);
    s.cap_min = cell_double(gen, r, 4);
    s.cap_max = cell_double(gen, r, 5);
    inst.generators.push_back(s);
  }
  const std::size_t G = inst.generators.size();

  std::vector<std::string> want{"t"};
  for (auto& c : generator_columns(G, "g")) want.push_back(c);
  if (cf.header.size() != G + 1) {
    throw Error(ErrorCode::dimension_mismatch,
                cf.file + ": " + std::to_string(cf.header.size() - 1) +
                    " generator columns but generators file lists " + std::to_string(G));
  }
  expect_header(cf, want);
  expect_period_column(dem);
  expect_period_column(cf);
  if (dem.rows.size() != cf.rows.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "demand has " + std::to_string(dem.rows.size()) + " periods, capacity factors " +
                    std::to_string(cf.rows.size()));
  }
  const std::size_t T = dem.rows.size();
  inst.horizon = T;
  inst.demand.resize(T);
  inst.cap_factor = Matrix(G, T);
  for (std::size_t t = 0; t < T; ++t) {
    inst.demand[t] = cell_double(dem, t, 1);
    for (std::size_t g = 0; g < G; ++g) {
      const double v = cell_double(cf, t, g + 1);
      if (v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::invalid_input, cf.file + ": capacity factor " + format_double(v) +
                                                  " out of [0, 1] at row " + std::to_string(t + 1) +
                                                  ", column g" + std::to_string(g));
      }
      inst.cap_factor(g, t) = v;
    }
  }
  validate(inst);
  return inst;
}

void save_instance(const ProblemInstance& inst, const fs::path& dir) {
  const InstanceFiles f = instance_files(dir);
  const std::size_t G = inst.generator_count();
  {
    auto out = open_out(f.demand);
    out << "t,demand_mwh\n";
    for (std::size_t t = 0; t < inst.horizon; ++t) out << t << ',' << format_double(inst.demand[t]) << '\n';
    close_out(out, f.demand);
  }
  {
    auto out = open_out(f.cap_factor);
    out << 't';
    for (const auto& c : generator_columns(G, "g")) out << ',' << c;
    out << '\n';
    for (std::size_t t = 0; t < inst.horizon; ++t) {
      out << t;
      for (std::size_t g = 0; g < G; ++g) out << ',' << format_double(inst.cap_factor(g, t));
      out << '\n';
    }
    close_out(out, f.cap_factor);
  }
  {
    auto out = open_out(f.generators);
    out << "id,kind,inv_cost,op_cost,cap_min,cap_max\n";
    for (const auto& s : inst.generators) {
      out << s.id << ',' << to_string(s.kind) << ',' << format_double(s.inv_cost) << ','
          << format_double(s.op_cost) << ',' << format_double(s.cap_min) << ','
          << format_double(s.cap_max) << '\n';
    }
    close_out(out, f.generators);
  }
  json meta{{"delta", inst.delta}, {"ns_cost", inst.ns_cost}};
  write_text(dir / "instance.json", meta.dump(2) + "\n");
}

ProblemInstance load_instance_dir(const fs::path& dir) {
  double delta = 1.0;
  double ns_cost = 5000.0;
  if (fs::exists(dir / "instance.json")) {
    const json meta = read_json(dir / "instance.json");
    for (const auto& [key, value] : meta.items()) {
      if (key == "delta") delta = value.get<double>();
      else if (key == "ns_cost") ns_cost = value.get<double>();
      else throw Error(ErrorCode::invalid_input, "instance.json: unknown key '" + key + "'");
    }
  }
  return load_instance(instance_files(dir), delta, ns_cost);
}

void save_trace(const BoundsTrace& trace, const fs::path& path) {
  auto out = open_out(path);
  out << "iter,k_used,lb_candidate,ub_candidate,lb,ub,gap,cluster_time_s,agg_solve_time_s,"
         "dispatch_time_s\n";
  for (const auto& r : trace.records) {
    out << r.iter << ',' << r.k_used << ',' << format_double(r.lb_candidate) << ','
        << format_double(r.ub_candidate) << ',' << format_double(r.lb) << ','
        << format_double(r.ub) << ',' << format_double(r.gap) << ','
        << format_double(r.cluster_time) << ',' << format_double(r.agg_solve_time) << ','
        << format_double(r.dispatch_time) << '\n';
  }
  close_out(out, path);
}

std::vector<IterationRecord> load_trace(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"iter", "k_used", "lb_candidate", "ub_candidate", "lb", "ub", "gap",
                    "cluster_time_s", "agg_solve_time_s", "dispatch_time_s"});
  std::vector<IterationRecord> recs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    IterationRecord rec;
    rec.iter = cell_index(t, r, 0);
    rec.k_used = cell_index(t, r, 1);
    rec.lb_candidate = cell_double(t, r, 2);
    rec.ub_candidate = cell_double(t, r, 3);
    rec.lb = cell_double(t, r, 4);
    rec.ub = cell_double(t, r, 5);
    rec.gap = cell_double(t, r, 6);
    rec.cluster_time = cell_double(t, r, 7);
    rec.agg_solve_time = cell_double(t, r, 8);
    rec.dispatch_time = cell_double(t, r, 9);
    recs.push_back(rec);
  }
  return recs;
}

void save_solution(const FullSolution& sol, const fs::path& dir) {
  const std::size_t G = sol.plan.capacity.size();
  const std::size_t T = sol.unserved.size();
  if (sol.plan.built.size() != G || sol.gen.rows() != G || sol.gen.cols() != T) {
    throw Error(ErrorCode::dimension_mismatch, "solution arrays are inconsistent");
  }
  {
    const fs::path p = dir / "plan.csv";
    auto out = open_out(p);
    out << "g,capacity_mw,built\n";
    for (std::size_t g = 0; g < G; ++g) {
      out << g << ',' << format_double(sol.plan.capacity[g]) << ',' << sol.plan.built[g] << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = dir / "dispatch.csv";
    auto out = open_out(p);
    out << "t,unserved_mwh";
    for (const auto& c : generator_columns(G, "p_g")) out << ',' << c;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t << ',' << format_double(sol.unserved[t]);
      for (std::size_t g = 0; g < G; ++g) out << ',' << format_double(sol.gen(g, t));
      out << '\n';
    }
    close_out(out, p);
  }
}

FullSolution load_solution(const fs::path& dir) {
  const CsvTable plan = read_csv(dir / "plan.csv");
  const CsvTable disp = read_csv(dir / "dispatch.csv");
  expect_header(plan, {"g", "capacity_mw", "built"});
  const std::size_t G = plan.rows.size();
  std::vector<std::string> want{"t", "unserved_mwh"};
  for (auto& c : generator_columns(G, "p_g")) want.push_back(c);
  expect_header(disp, want);
  expect_period_column(disp);
  FullSolution sol;
  for (std::size_t g = 0; g < G; ++g) {
    if (cell_index(plan, g, 0) != g) parse_fail(plan.file, g + 1, 1, "generators must ascend from 0");
    sol.plan.capacity.push_back(cell_double(plan, g, 1));
    const std::size_t b = cell_index(plan, g, 2);
    if (b > 1) parse_fail(plan.file, g + 1, 3, "built must be 0 or 1");
    sol.plan.built.push_back(static_cast<int>(b));
  }
  const std::size_t T = disp.rows.size();
  sol.unserved.resize(T);
  sol.gen = Matrix(G, T);
  for (std::size_t t = 0; t < T; ++t) {
    sol.unserved[t] = cell_double(disp, t, 1);
    for (std::size_t g = 0; g < G; ++g) sol.gen(g, t) = cell_double(disp, t, g + 2);
  }
  return sol;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  close_out(out, path);
}

namespace {

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::invalid_input, "config key '" + key + "' has the wrong type");
  }
}

[[noreturn]] void unknown_key(const std::string& where, const std::string& key) {
  throw Error(ErrorCode::invalid_input, "unknown " + where + " config key '" + key + "'");
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, where + " config must be an object");
}

}  // namespace

SyntheticConfig synthetic_from_json(const json& j) {
  require_object(j, "synthetic");
  SyntheticConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "n_generators") c.n_generators = get_as<std::size_t>(v, k);
    else if (k == "n_periods") c.n_periods = get_as<std::size_t>(v, k);
    else if (k == "thermal_share") c.thermal_share = get_as<double>(v, k);
    else if (k == "lognormal_mu") c.lognormal_mu = get_as<double>(v, k);
    else if (k == "lognormal_sigma") c.lognormal_sigma = get_as<double>(v, k);
    else if (k == "demand_upper_divisor") c.demand_upper_divisor = get_as<double>(v, k);
    else if (k == "thermal_inv_cost") c.thermal_inv_cost = get_as<double>(v, k);
    else if (k == "renewable_inv_cost") c.renewable_inv_cost = get_as<double>(v, k);
    else if (k == "thermal_op_cost") c.thermal_op_cost = get_as<double>(v, k);
    else if (k == "renewable_op_cost") c.renewable_op_cost = get_as<double>(v, k);
    else if (k == "ns_cost") c.ns_cost = get_as<double>(v, k);
    else if (k == "cap_min") c.cap_min = get_as<double>(v, k);
    else if (k == "cap_max") c.cap_max = get_as<double>(v, k);
    else if (k == "delta") c.delta = get_as<double>(v, k);
    else if (k == "normalization") c.normalization = parse_normalization(get_as<std::string>(v, k));
    else if (k == "seed") c.seed = get_as<std::uint64_t>(v, k);
    else unknown_key("synthetic", k);
  }
  validate(c);
  return c;
}

json to_json(const SyntheticConfig& c) {
  return json{{"n_generators", c.n_generators},
              {"n_periods", c.n_periods},
              {"thermal_share", c.thermal_share},
              {"lognormal_mu", c.lognormal_mu},
              {"lognormal_sigma", c.lognormal_sigma},
              {"demand_upper_divisor", c.demand_upper_divisor},
              {"thermal_inv_cost", c.thermal_inv_cost},
              {"renewable_inv_cost", c.renewable_inv_cost},
              {"thermal_op_cost", c.thermal_op_cost},
              {"renewable_op_cost", c.renewable_op_cost},
              {"ns_cost", c.ns_cost},
              {"cap_min", c.cap_min},
              {"cap_max", c.cap_max},
              {"delta", c.delta},
              {"normalization", to_string(c.normalization)},
              {"seed", c.seed}};
}

MilpOptions milp_from_json(const json& j) {
  require_object(j, "milp");
  MilpOptions o;
  for (const auto& [k, v] : j.items()) {
    if (k == "mip_tol") o.mip_tol = get_as<double>(v, k);
    else if (k == "node_limit") o.node_limit = get_as<std::size_t>(v, k);
    else if (k == "lp_tol") o.lp_tol = get_as<double>(v, k);
    else if (k == "branching") o.branching = parse_branching(get_as<std::string>(v, k));
    else if (k == "search") o.search = parse_search(get_as<std::string>(v, k));
    else if (k == "max_cut_rounds") o.max_cut_rounds = get_as<std::size_t>(v, k);
    else unknown_key("milp", k);
  }
  validate(o);
  return o;
}

json to_json(const MilpOptions& o) {
  return json{{"mip_tol", o.mip_tol},
              {"node_limit", o.node_limit},
              {"lp_tol", o.lp_tol},
              {"branching", to_string(o.branching)},
              {"search", to_string(o.search)},
              {"max_cut_rounds", o.max_cut_rounds}};
}

AlgoConfig algo_from_json(const json& j) {
  require_object(j, "algorithm");
  AlgoConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "k0") c.k0 = get_as<std::size_t>(v, k);
    else if (k == "alpha") c.alpha = get_as<std::size_t>(v, k);
    else if (k == "eps_threshold") c.eps_threshold = get_as<double>(v, k);
    else if (k == "max_iters") c.max_iters = get_as<std::size_t>(v, k);
    else if (k == "method") c.method = parse_cluster_method(get_as<std::string>(v, k));
    else if (k == "seed") c.seed = get_as<std::uint64_t>(v, k);
    else if (k == "scaling") c.scaling = parse_scaling(get_as<std::string>(v, k));
    else if (k == "features") c.features = parse_feature_set(get_as<std::string>(v, k));
    else if (k == "restarts") c.cluster_opts.restarts = get_as<std::size_t>(v, k);
    else if (k == "cluster_max_iter") c.cluster_opts.max_iter = get_as<std::size_t>(v, k);
    else if (k == "gmm_tol") c.cluster_opts.gmm_tol = get_as<double>(v, k);
    else if (k == "milp") c.milp_opts = milp_from_json(v);
    else unknown_key("algorithm", k);
  }
  validate(c);
  return c;
}

json to_json(const AlgoConfig& c) {
  return json{{"k0", c.k0},
              {"alpha", c.alpha},
              {"eps_threshold", c.eps_threshold},
              {"max_iters", c.max_iters},
              {"method", to_string(c.method)},
              {"seed", c.seed},
              {"scaling", to_string(c.scaling)},
              {"features", to_string(c.features)},
              {"restarts", c.cluster_opts.restarts},
              {"cluster_max_iter", c.cluster_opts.max_iter},
              {"gmm_tol", c.cluster_opts.gmm_tol},
              {"milp", to_json(c.milp_opts)}};
}

}  // namespace vpp
