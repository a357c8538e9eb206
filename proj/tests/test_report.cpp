#include <unistd.h>

#include <filesystem>

#include "doctest.h"
#include "oracle.hpp"
#include "vpp/data_io.hpp"
#include "vpp/report.hpp"

namespace fs = std::filesystem;
using namespace vpp;

namespace {

std::size_t occurrences(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
  return n;
}

BoundsTrace small_trace(std::uint64_t seed, ClusterMethod m) {
  AlgoConfig cfg;
  cfg.method = m;
  return run_tsa(oracle::random_instance(6, 80, seed), cfg);
}

}  // namespace

TEST_CASE("plot regenerated from the trace file is identical") {
  const fs::path dir = fs::temp_directory_path() / ("vpp_report_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const BoundsTrace tr = small_trace(2, ClusterMethod::kmeans);
  save_trace(tr, dir / "kmeans.csv");
  const std::string a = bounds_svg(load_series({dir / "kmeans.csv"}));
  const std::string b = bounds_svg(load_series({dir / "kmeans.csv"}));
  CHECK(a == b);
  CHECK(a.rfind("<?xml", 0) == 0);
  CHECK(a.find("version=\"1.1\"") != std::string::npos);
  CHECK(occurrences(a, "<polyline") == 2);
  CHECK(a.find("kmeans UB") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("one pair of lines per series") {
  std::vector<TraceSeries> series;
  for (ClusterMethod m : {ClusterMethod::kmeans, ClusterMethod::kmedoids, ClusterMethod::gmm}) {
    series.push_back({to_string(m), small_trace(3, m).records});
  }
  const std::string svg = bounds_svg(series);
  CHECK(occurrences(svg, "<polyline") == 6);
  CHECK(occurrences(svg, "stroke-dasharray") == 6);  // LB lines and their legend entries
}

TEST_CASE("log scale skips non-positive bounds") {
  std::vector<IterationRecord> recs(3);
  for (std::size_t i = 0; i < 3; ++i) {
    recs[i].iter = i;
    recs[i].ub = 1000.0 / static_cast<double>(i + 1);
    recs[i].lb = i == 0 ? 0.0 : 100.0 * static_cast<double>(i);
  }
  PlotOptions po;
  po.log_scale = true;
  const std::string svg = bounds_svg({{"x", recs}}, po);
  CHECK(svg.find("(log)") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
  // empty input still renders an axis frame
  CHECK(bounds_svg({}).find("</svg>") != std::string::npos);
}

TEST_CASE("comparison table") {
  std::vector<ComparisonRow> rows(2);
  rows[0].method = "kmeans";
  rows[0].k_final = 40;
  rows[0].iterations = 6;
  rows[0].final_gap = 0.0078125;
  rows[0].wall_time = 2.0;
  rows[0].status = "gap_met";
  rows[1].method = "gmm";
  rows[1].wall_time = 1.0;
  rows[1].status = "error: degenerate, details";
  std::string csv = comparison_csv(rows);
  CHECK(csv.rfind("method,k_final,iterations,final_gap,wall_time_s,relative_time,status\n", 0) == 0);
  CHECK(csv.find("kmeans,40,6,0.0078125,2,,gap_met\n") != std::string::npos);
  CHECK(csv.find("error: degenerate; details") != std::string::npos);
  set_relative_times(rows, 4.0);
  csv = comparison_csv(rows);
  CHECK(csv.find("kmeans,40,6,0.0078125,2,0.5,gap_met\n") != std::string::npos);
}

TEST_CASE("manifest fields") {
  RunManifest m;
  m.command = "vpp generate --out x";
  m.config = nlohmann::json{{"synthetic", {{"seed", 3}}}};
  m.seed = 3;
  m.artifacts = {"x/demand.csv"};
  m.version = software_version();
  m.started_at = utc_timestamp();
  const auto j = to_json(m);
  for (const char* key : {"command", "config", "seed", "artifacts", "version", "started_at",
                          "wall_time_s"}) {
    CHECK(j.contains(key));
  }
  CHECK(m.started_at.size() == 20);
}
