#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kppfrag/experiments.hpp"
#include "kppfrag/optimizer.hpp"

namespace kppfrag::io {

enum class Command { Solve, Optimize, Sweep, PeriodiseCheck, Lemma2, Efficiency };

std::string to_string(Command c);
/// Throws ConfigError for unknown names.
Command parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::Solve;
  std::string preset;  ///< empty when none was applied
  std::size_t nx = 1000;
  std::size_t ny = 0;  ///< 0 for a 1D grid
  /// Single value for solve/optimize/periodise-check/lemma2 (lemma2 reads it
  /// as the lower end of the sampled interval); a strictly decreasing list
  /// for sweep and efficiency.
  std::vector<double> mu;
  double kappa = 1.0;
  double m0 = 0.3;
  /// "crenel", "constant", "fourier" (random guess from the seed) or the path
  /// of a field CSV. Used by every command except optimize and sweep.
  std::string resource = "crenel";
  OptimConfig optim;
  SolverConfig solver;
  ResolutionPolicy resolution = ResolutionPolicy::Enforce;
  int k_max = 3;
  int lemma2_samples = 16;
  std::string out = "kppfrag-out";
  bool plot = false;
  bool record_timing = true;

  int dim() const noexcept { return ny == 0 ? 1 : 2; }
  Grid grid() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Command-line values; every set member overrides the file.
struct ConfigOverrides {
  std::optional<std::string> command;
  std::optional<std::string> preset;
  std::optional<std::vector<double>> mu;
  std::optional<double> m0;
  std::optional<double> kappa;
  std::optional<std::string> grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool plot = false;
};

/// Names accepted by --preset.
std::vector<std::string> preset_names();

/// Parses "N" or "NxM".
void parse_grid_spec(const std::string& spec, std::size_t& nx, std::size_t& ny);
std::string grid_spec(const RunConfig& cfg);

/// defaults <- preset <- JSON keys <- overrides, then validate(). Every
/// failure is a ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& file, const ConfigOverrides& flags = {});
RunConfig parse_config(const std::optional<std::string>& path, const ConfigOverrides& flags);

/// Full echo; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& cfg);

/// Checks every precondition the selected command will rely on.
void validate(const RunConfig& cfg);

}  // namespace kppfrag::io
