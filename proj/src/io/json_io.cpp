#include "kppfrag/io/json_io.hpp"

#include <algorithm>
#include <type_traits>

#include "kppfrag/errors.hpp"

namespace kppfrag::io {

json grid_to_json(const Grid& g) {
  json j = {{"dim", g.dim()}, {"nx", g.nx()}};
  if (g.dim() == 2) j["ny"] = g.ny();
  return j;
}

json params_to_json(const ProblemParams& p) {
  return {{"mu", p.mu}, {"kappa", p.kappa}, {"m0", p.m0}};
}

json optim_config_to_json(const OptimConfig& cfg) {
  return {{"max_outer_iters", cfg.max_outer_iters},
          {"armijo_c", cfg.armijo_c},
          {"armijo_shrink", cfg.armijo_shrink},
          {"initial_step", cfg.initial_step},
          {"stop_rel_objective", cfg.stop_rel_objective},
          {"stall_window", cfg.stall_window},
          {"stop_lp_value", cfg.stop_lp_value},
          {"min_step", cfg.min_step},
          {"starts", cfg.starts},
          {"seed", cfg.seed}};
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& prefix) {
  const json& v = j.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(prefix + key + ": expected an integer");
  } else {
    if (!v.is_number()) throw ConfigError(prefix + key + ": expected a number");
  }
  out = v.get<T>();
}

}  // namespace

OptimConfig optim_config_from_json(const json& j, OptimConfig base) {
  if (!j.is_object()) throw ConfigError("optimizer: expected an object");
  const std::string p = "optimizer.";
  for (const auto& [key, value] : j.items()) {
    if (key == "max_outer_iters") {
      read_field(j, "max_outer_iters", base.max_outer_iters, p);
    } else if (key == "armijo_c") {
      read_field(j, "armijo_c", base.armijo_c, p);
    } else if (key == "armijo_shrink") {
      read_field(j, "armijo_shrink", base.armijo_shrink, p);
    } else if (key == "initial_step") {
      read_field(j, "initial_step", base.initial_step, p);
    } else if (key == "stop_rel_objective") {
      read_field(j, "stop_rel_objective", base.stop_rel_objective, p);
    } else if (key == "stall_window") {
      read_field(j, "stall_window", base.stall_window, p);
    } else if (key == "stop_lp_value") {
      read_field(j, "stop_lp_value", base.stop_lp_value, p);
    } else if (key == "min_step") {
      read_field(j, "min_step", base.min_step, p);
    } else if (key == "starts") {
      read_field(j, "starts", base.starts, p);
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) {
        throw ConfigError("optimizer.seed: expected a non-negative integer");
      }
      base.seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("optimizer." + key + ": unknown key");
    }
  }
  return base;
}

json solver_config_to_json(const SolverConfig& cfg) {
  return {{"newton_tol", cfg.newton_tol},
          {"max_newton_iters", cfg.max_newton_iters},
          {"min_damping", cfg.min_damping},
          {"positivity_floor", cfg.positivity_floor},
          {"fallback_steps", cfg.fallback_steps},
          {"fallback_dt", cfg.fallback_dt}};
}

SolverConfig solver_config_from_json(const json& j, SolverConfig base) {
  if (!j.is_object()) throw ConfigError("solver: expected an object");
  const std::string p = "solver.";
  for (const auto& [key, value] : j.items()) {
    if (key == "newton_tol") {
      read_field(j, "newton_tol", base.newton_tol, p);
    } else if (key == "max_newton_iters") {
      read_field(j, "max_newton_iters", base.max_newton_iters, p);
    } else if (key == "min_damping") {
      read_field(j, "min_damping", base.min_damping, p);
    } else if (key == "positivity_floor") {
      read_field(j, "positivity_floor", base.positivity_floor, p);
    } else if (key == "fallback_steps") {
      read_field(j, "fallback_steps", base.fallback_steps, p);
    } else if (key == "fallback_dt") {
      read_field(j, "fallback_dt", base.fallback_dt, p);
    } else {
      throw ConfigError("solver." + key + ": unknown key");
    }
  }
  return base;
}

json steady_state_diagnostics(const SteadyState& s) {
  return {{"iterations", s.iterations},
          {"residual_norm", s.residual_norm},
          {"tolerance", s.tolerance},
          {"used_fallback", s.used_fallback},
          {"F", total_population(s)},
          {"theta_min", *std::min_element(s.theta.data().begin(), s.theta.data().end())},
          {"grid", grid_to_json(s.theta.grid())}};
}

json trajectory_to_json(const std::vector<TrajectoryPoint>& t) {
  json F = json::array(), step = json::array(), lp = json::array();
  for (const auto& p : t) {
    F.push_back(p.F);
    step.push_back(p.step);
    lp.push_back(p.lp_value);
  }
  return {{"F", F}, {"step", step}, {"lp_value", lp}};
}

json optim_run_to_json(const OptimRun& run, const ProblemParams& params, const OptimConfig& cfg) {
  json starts = json::array();
  for (const auto& s : run.starts) {
    json js = {{"start_index", s.start_index},
               {"seed", s.seed},
               {"termination", to_string(s.termination)},
               {"iterations", s.trajectory.empty() ? 0 : s.trajectory.size() - 1},
               {"trajectory", trajectory_to_json(s.trajectory)}};
    if (s.termination == Termination::Failed) {
      js["error"] = s.error;
    } else {
      js["F"] = s.F;
    }
    starts.push_back(std::move(js));
  }
  return {{"params", params_to_json(params)},
          {"grid", grid_to_json(run.best_m.grid())},
          {"optimizer", optim_config_to_json(cfg)},
          {"seed", cfg.seed},
          {"best_F", run.best_F},
          {"best_start", run.start_index},
          {"best_start_seed", run.seed},
          {"termination", to_string(run.termination)},
          {"trajectory", trajectory_to_json(run.trajectory)},
          {"starts", starts}};
}

json sweep_report_to_json(const SweepReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    json jr = {{"mu", r.mu}, {"ok", r.ok}, {"under_resolved", r.under_resolved},
               {"seconds", r.seconds}};
    if (r.ok) {
      jr["best_F"] = r.best_F;
      jr["bv"] = r.bv;
      jr["jumps"] = r.jumps ? json(*r.jumps) : json(nullptr);
      jr["bangbang_frac"] = r.bangbang_fraction;
      jr["best_start"] = r.best_start;
      jr["starts_failed"] = r.starts_failed;
    } else {
      jr["error"] = r.error;
    }
    records.push_back(std::move(jr));
  }
  return {{"kappa", report.kappa},
          {"m0", report.m0},
          {"grid", grid_to_json(report.grid)},
          {"optimizer", optim_config_to_json(report.optim)},
          {"bv_trend_ok", report.bv_trend_ok},
          {"records", records}};
}

json periodisation_to_json(const std::vector<PeriodisationRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"k", r.k}, {"mu", r.mu}, {"nodes", r.nodes}, {"F", r.F},
                   {"deviation", r.deviation}});
  }
  return out;
}

json lemma2_to_json(const Lemma2Result& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k", row.k}, {"mu", row.mu}, {"F", row.F}, {"margin", row.margin}});
  }
  return {{"eta", r.eta}, {"sampled_mu", r.sampled_mu}, {"bound_holds", r.bound_holds},
          {"rows", rows}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace kppfrag::io
