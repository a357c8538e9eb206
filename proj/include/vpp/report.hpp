#pragma once

// Bounds plots, comparison tables and run manifests.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpp/tsa.hpp"

namespace vpp {

struct TraceSeries {
  std::string label;
  std::vector<IterationRecord> records;
};

struct PlotOptions {
  bool log_scale = false;
  std::string title = "Upper and lower bounds";
  int width = 800;
  int height = 500;
};

/// SVG 1.1 with one UB polyline (solid) and one LB polyline (dashed) per
/// series. Output depends only on the arguments.
std::string bounds_svg(const std::vector<TraceSeries>& series, const PlotOptions& opts = {});

/// Reads each trace CSV and labels it with the file stem.
std::vector<TraceSeries> load_series(const std::vector<std::filesystem::path>& traces);

struct ComparisonRow {
  std::string method;
  std::size_t k_final = 0;
  std::size_t iterations = 0;
  double final_gap = 0.0;
  double wall_time = 0.0;
  double relative_time = -1.0;  // wall_time / baseline; negative when no baseline
  std::string status = "ok";    // termination reason or error message
};

/// Fills relative_time from the baseline (wall time of the full-scale solve).
void set_relative_times(std::vector<ComparisonRow>& rows, double baseline_time);

/// method,k_final,iterations,final_gap,wall_time_s,relative_time,status
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  std::string version;
  std::string started_at;  // UTC, ISO 8601
  double wall_time = 0.0;
};

nlohmann::json to_json(const RunManifest& m);
std::string utc_timestamp();
const char* software_version();

}  // namespace vpp
