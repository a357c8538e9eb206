#pragma once

// Synthetic instances, CSV persistence and JSON run configuration.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpp/model.hpp"
#include "vpp/tsa.hpp"

namespace vpp {

enum class Normalization { per_generator, global, clip };

const char* to_string(Normalization n);
Normalization parse_normalization(const std::string& text);

struct SyntheticConfig {
  std::size_t n_generators = 100;
  std::size_t n_periods = 8760;
  double thermal_share = 0.2;
  double lognormal_mu = -1.0;
  double lognormal_sigma = 0.5;
  double demand_upper_divisor = 3.0;  // D_t ~ U(0, |G| / divisor)
  double thermal_inv_cost = 40000.0;
  double renewable_inv_cost = 30000.0;
  double thermal_op_cost = 50.0;
  double renewable_op_cost = 3.0;
  double ns_cost = 5000.0;
  double cap_min = 0.1;
  double cap_max = 1.0;
  double delta = 1.0;
  Normalization normalization = Normalization::per_generator;
  std::uint64_t seed = 1;
};

void validate(const SyntheticConfig& config);

/// Thermal units come first (F = 1); every renewable series is exp(N(mu,
/// sigma^2)) normalized per `normalization`; demand is uniform.
ProblemInstance generate_synthetic(const SyntheticConfig& config);

/// round-half-up(share * n)
std::size_t thermal_count(double share, std::size_t n);

struct InstanceFiles {
  std::filesystem::path demand;
  std::filesystem::path cap_factor;
  std::filesystem::path generators;
};

/// demand.csv, cap_factor.csv, generators.csv inside dir.
InstanceFiles instance_files(const std::filesystem::path& dir);

/// Throws Error(parse_error) with file, row and column for malformed input,
/// Error(dimension_mismatch) when files disagree, and Error(invalid_input)
/// for out-of-range data.
ProblemInstance load_instance(const InstanceFiles& files, double delta = 1.0,
                              double ns_cost = 5000.0);

/// Writes the three CSV files plus instance.json (delta, ns_cost).
void save_instance(const ProblemInstance& instance, const std::filesystem::path& dir);

/// Reads a directory written by save_instance.
ProblemInstance load_instance_dir(const std::filesystem::path& dir);

void save_trace(const BoundsTrace& trace, const std::filesystem::path& path);
std::vector<IterationRecord> load_trace(const std::filesystem::path& path);

/// plan.csv (g,capacity_mw,built) and dispatch.csv (t,unserved_mwh,p_g0,...).
void save_solution(const FullSolution& sol, const std::filesystem::path& dir);
FullSolution load_solution(const std::filesystem::path& dir);

/// Strict JSON mapping: unknown keys raise Error(invalid_input) naming them.
SyntheticConfig synthetic_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticConfig& c);
AlgoConfig algo_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlgoConfig& c);
MilpOptions milp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MilpOptions& o);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 17 significant digits, enough to round-trip a double.
std::string format_double(double v);

}  // namespace vpp
