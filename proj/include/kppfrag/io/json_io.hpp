#pragma once

#include <json.hpp>

#include "kppfrag/experiments.hpp"
#include "kppfrag/optimizer.hpp"
#include "kppfrag/steady_state.hpp"

namespace kppfrag::io {

using nlohmann::json;

json grid_to_json(const Grid& g);
json params_to_json(const ProblemParams& p);

json optim_config_to_json(const OptimConfig& cfg);
/// Reads the keys present in `j` over `base`; unknown keys raise ConfigError.
OptimConfig optim_config_from_json(const json& j, OptimConfig base = {});

json solver_config_to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const json& j, SolverConfig base = {});

/// Iterations, residual, tolerance, fallback flag and F; no field values.
json steady_state_diagnostics(const SteadyState& s);

/// Columnar trajectory: {"F": [...], "step": [...], "lp_value": [...]}.
json trajectory_to_json(const std::vector<TrajectoryPoint>& t);

json optim_run_to_json(const OptimRun& run, const ProblemParams& params, const OptimConfig& cfg);

/// Report without field values; those go to CSV files. `seconds` is written
/// as-is, so a report built with record_timing=false is fully deterministic.
json sweep_report_to_json(const SweepReport& report);

json periodisation_to_json(const std::vector<PeriodisationRow>& rows);
json lemma2_to_json(const Lemma2Result& r);

/// Deterministic text form: 2-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace kppfrag::io
