#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "vpp/data_io.hpp"

namespace fs = std::filesystem;
using namespace vpp;

namespace {

const fs::path kTmp = VPP_TEST_TMP;

struct Run {
  int code = -1;
  std::string err;
};

Run vpp_cli(const std::string& args) {
  fs::create_directories(kTmp);
  const fs::path err = kTmp / "stderr.txt";
  const std::string cmd = std::string(VPP_CLI_PATH) + " " + args + " > " +
                          (kTmp / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path fixture(const std::string& name, const ProblemInstance& inst) {
  const fs::path dir = kTmp / name;
  fs::remove_all(dir);
  save_instance(inst, dir);
  return dir;
}

}  // namespace

TEST_CASE("generate with defaults writes the full-size instance") {
  const fs::path out = kTmp / "gen_default";
  fs::remove_all(out);
  REQUIRE(vpp_cli("--out " + out.string() + " generate").code == 0);
  CHECK(lines(out / "demand.csv") == 8761);
  CHECK(lines(out / "generators.csv") == 101);
  CHECK(slurp(out / "cap_factor.csv").find(",g99\n") != std::string::npos);
  const auto manifest = read_json(out / "manifest.json");
  CHECK(manifest["config"]["synthetic"]["n_generators"] == 100);
  CHECK(manifest["artifacts"].size() == 5);
}

TEST_CASE("generate is deterministic and honours the config file") {
  const fs::path cfg = kTmp / "small.json";
  std::ofstream(cfg) << R"({"synthetic": {"n_generators": 5, "n_periods": 30}})";
  const fs::path a = kTmp / "gen_a", b = kTmp / "gen_b";
  REQUIRE(vpp_cli("--config " + cfg.string() + " --out " + a.string() + " generate --seed 4").code == 0);
  REQUIRE(vpp_cli("--config " + cfg.string() + " --out " + b.string() + " generate --seed 4").code == 0);
  for (const char* f : {"demand.csv", "cap_factor.csv", "generators.csv", "instance.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(lines(a / "demand.csv") == 31);
}

TEST_CASE("unknown config keys are named in the error") {
  const fs::path cfg = kTmp / "bad.json";
  std::ofstream(cfg) << R"({"synthetic": {"n_gens": 5}})";
  const Run r = vpp_cli("--config " + cfg.string() + " --out " + (kTmp / "x").string() + " generate");
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "invalid_input");
  CHECK(j["message"].get<std::string>().find("n_gens") != std::string::npos);
}

TEST_CASE("solve tsa on the oracle fixture") {
  const ProblemInstance inst = oracle::random_instance(8, 96, 1);
  const double star = oracle::enumerate(inst).value;
  const fs::path dir = fixture("fx8", inst);
  const fs::path out = kTmp / "solve_tsa";
  REQUIRE(vpp_cli("--out " + out.string() + " solve --instance " + dir.string()).code == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary["final_gap"].get<double>() <= 0.01);
  CHECK(summary["final_lb"].get<double>() <= star * (1 + 1e-9));
  CHECK(summary["final_ub"].get<double>() >= star * (1 - 1e-9));
  const FullSolution sol = load_solution(out);
  CHECK(check_feasibility(inst, sol).empty());
  CHECK(evaluate_full_objective(inst, sol) ==
        doctest::Approx(summary["final_ub"].get<double>()).epsilon(1e-12));
  CHECK(load_trace(out / "trace.csv").size() == summary["iterations"].get<std::size_t>());
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("solve tsa with k0 equal to the horizon") {
  const fs::path dir = fixture("fx_id", oracle::random_instance(5, 24, 2));
  const fs::path out = kTmp / "solve_id";
  REQUIRE(vpp_cli("--out " + out.string() + " solve --instance " + dir.string() + " --k0 24").code == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary["iterations"] == 1);
  CHECK(summary["final_gap"].get<double>() <= 1e-6);
}

TEST_CASE("solve full on a zero-demand instance") {
  ProblemInstance inst = oracle::random_instance(4, 10, 3);
  std::fill(inst.demand.begin(), inst.demand.end(), 0.0);
  const fs::path dir = fixture("fx_zero", inst);
  const fs::path out = kTmp / "solve_zero";
  REQUIRE(vpp_cli("--out " + out.string() + " solve --mode full --instance " + dir.string()).code == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary["objective"].get<double>() == 0.0);
  CHECK(summary["status"] == "proved_optimal");
}

TEST_CASE("iteration limit maps to the solver-limit exit code") {
  const fs::path dir = fixture("fx_lim", oracle::random_instance(6, 200, 4));
  const Run r = vpp_cli("--out " + (kTmp / "lim").string() + " solve --instance " + dir.string() +
                        " --k0 1 --max-iters 1 --eps-thr 1e-9");
  CHECK(r.code == 3);
}

TEST_CASE("compare three methods with a baseline, then replot") {
  const ProblemInstance inst = oracle::random_instance(8, 96, 2);
  const double star = oracle::enumerate(inst).value;
  const fs::path dir = fixture("fx_cmp", inst);
  const fs::path out = kTmp / "cmp";
  fs::remove_all(out);
  REQUIRE(vpp_cli("--threads 2 --out " + out.string() + " compare --baseline --instance " +
                  dir.string()).code == 0);
  for (const char* m : {"kmeans", "kmedoids", "gmm"}) {
    const auto recs = load_trace(out / "traces" / (std::string(m) + ".csv"));
    REQUIRE(!recs.empty());
    for (const auto& r : recs) {
      CHECK(r.lb <= star * (1 + 1e-9));
      CHECK(r.ub >= star * (1 - 1e-9));
    }
  }
  const std::string table = slurp(out / "comparison.csv");
  CHECK(lines(out / "comparison.csv") == 5);
  CHECK(table.find("full-scale") != std::string::npos);
  CHECK(table.find(",,") == std::string::npos);  // relative time filled for every row

  const fs::path replot = kTmp / "replot.svg";
  REQUIRE(vpp_cli("--out " + replot.string() + " plot " + (out / "traces" / "kmeans.csv").string() +
                  " " + (out / "traces" / "kmedoids.csv").string() + " " +
                  (out / "traces" / "gmm.csv").string()).code == 0);
  CHECK(slurp(replot) == slurp(out / "bounds.svg"));
}

TEST_CASE("compare with a single method draws one series") {
  const fs::path dir = fixture("fx_one", oracle::random_instance(5, 48, 6));
  const fs::path out = kTmp / "cmp_one";
  fs::remove_all(out);
  REQUIRE(vpp_cli("--out " + out.string() + " compare --methods kmeans --instance " + dir.string()).code == 0);
  const std::string svg = slurp(out / "bounds.svg");
  std::size_t n = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++n;
  CHECK(n == 2);
  CHECK(lines(out / "comparison.csv") == 2);
}

TEST_CASE("input and I/O errors use their exit codes") {
  CHECK(vpp_cli("--out x solve --instance " + (kTmp / "missing").string()).code == 4);
  CHECK(vpp_cli("--out x solve --bogus").code == 2);
  CHECK(vpp_cli("--out x solve --instance . --method spectral").code == 2);
}
