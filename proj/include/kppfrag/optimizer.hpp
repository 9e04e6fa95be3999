#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kppfrag/grid.hpp"
#include "kppfrag/steady_state.hpp"

namespace kppfrag {

struct OptimConfig {
  int max_outer_iters = 500;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double initial_step = 1.0;
  /// Stop once |dF|/|F| stays below this for `stall_window` iterations.
  double stop_rel_objective = 1e-9;
  int stall_window = 5;
  double stop_lp_value = 1e-10;
  double min_step = 0x1p-20;
  int starts = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Termination {
  LpValue,            ///< direction LP value below stop_lp_value
  RelativeObjective,  ///< relative objective change stalled
  IterationCap,
  StepFailure,        ///< no Armijo step above min_step
  Failed,             ///< the start raised an error
};

std::string to_string(Termination t);

/// State after iteration i: objective, step that produced it (0 for the
/// initial iterate) and the LP value of the direction computed at it.
struct TrajectoryPoint {
  double F = 0.0;
  double step = 0.0;
  double lp_value = 0.0;
};

struct StartRun {
  std::size_t start_index = 0;
  std::uint64_t seed = 0;
  std::optional<ResourceField> m;
  std::optional<ScalarField> theta;
  double F = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  Termination termination = Termination::Failed;
  std::string error;
};

struct OptimRun {
  ResourceField best_m;
  ScalarField best_theta;
  double best_F = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  Termination termination = Termination::Failed;
  std::size_t start_index = 0;
  std::uint64_t seed = 0;
  std::vector<StartRun> starts;
};

struct AscentStep {
  ResourceField m;
  ScalarField theta;
  double F = 0.0;
  double step = 0.0;
};

/// Backtracking along m + t*xi for t = initial_step * shrink^j, accepting the
/// first t with F(m + t xi) >= F + c*t*lp_value. Returns the input unchanged
/// with step 0 when xi carries no predicted gain or no t >= min_step works.
/// Solver failures propagate.
AscentStep armijo_ascent_step(const ResourceField& m, const ScalarField& theta,
                              const ScalarField& xi, double F_current, double lp_value,
                              const ProblemParams& params, const OptimConfig& cfg,
                              const SolverConfig& solver_cfg = {});

/// Single ascent from `initial`: steady state, adjoint, LP direction, Armijo,
/// repeated until one of the stopping rules fires.
StartRun ascend(const ResourceField& initial, const ProblemParams& params,
                const OptimConfig& cfg, const SolverConfig& solver_cfg = {});

/// Multi-start ascent from cfg.starts random Fourier guesses; start j uses
/// substream j of cfg.seed. Starts run concurrently. The best run is the
/// highest F, ties resolved by the lower start index. Throws the first start's
/// error only when every start fails.
OptimRun optimize(const ProblemParams& params, const Grid& grid, const OptimConfig& cfg,
                  const SolverConfig& solver_cfg = {});

}  // namespace kppfrag
