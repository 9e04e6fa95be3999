#include "kppfrag/optimizer.hpp"

#include <cmath>

#include "kppfrag/adjoint.hpp"
#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"
#include "kppfrag/parallel.hpp"
#include "kppfrag/perturbation.hpp"
#include "kppfrag/random_guess.hpp"

namespace kppfrag {

void OptimConfig::validate() const {
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("armijo_c must lie in (0,1)");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw InvalidArgument("armijo_shrink must lie in (0,1)");
  }
  if (!(initial_step > 0.0 && initial_step <= 1.0)) {
    throw InvalidArgument("initial_step must lie in (0,1]");
  }
  if (max_outer_iters < 0) throw InvalidArgument("max_outer_iters must be non-negative");
  if (starts < 1) throw InvalidArgument("starts must be at least 1");
  if (stall_window < 1) throw InvalidArgument("stall_window must be at least 1");
  if (!(stop_rel_objective >= 0.0) || !(stop_lp_value >= 0.0) || !(min_step > 0.0)) {
    throw InvalidArgument("stopping thresholds must be non-negative");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::LpValue: return "lp_value";
    case Termination::RelativeObjective: return "relative_objective";
    case Termination::IterationCap: return "iteration_cap";
    case Termination::StepFailure: return "step_failure";
    case Termination::Failed: return "failed";
  }
  return "unknown";
}

AscentStep armijo_ascent_step(const ResourceField& m, const ScalarField& theta,
                              const ScalarField& xi, double F_current, double lp_value,
                              const ProblemParams& params, const OptimConfig& cfg,
                              const SolverConfig& solver_cfg) {
  const Grid& grid = m.grid();
  if (!(xi.grid() == grid)) throw InvalidArgument("direction on a different grid");
  bool moves = false;
  for (double v : xi.values()) moves = moves || v != 0.0;
  if (!moves || !(lp_value > 0.0)) return AscentStep{m, theta, F_current, 0.0};

  std::vector<double> cand(grid.size());
  for (double t = cfg.initial_step; t >= cfg.min_step; t *= cfg.armijo_shrink) {
    for (std::size_t k = 0; k < cand.size(); ++k) cand[k] = m[k] + t * xi[k];
    ResourceField mc = ResourceField::clamped(ScalarField(grid, cand), m.kappa(), m.m0());
    SteadyState st = solve_steady_state(mc, params, solver_cfg, theta);
    const double Fc = total_population(st);
    if (Fc >= F_current + cfg.armijo_c * t * lp_value) {
      return AscentStep{std::move(mc), std::move(st.theta), Fc, t};
    }
  }
  return AscentStep{m, theta, F_current, 0.0};
}

StartRun ascend(const ResourceField& initial, const ProblemParams& params,
                const OptimConfig& cfg, const SolverConfig& solver_cfg) {
  cfg.validate();
  StartRun run;
  ResourceField m = initial;
  SteadyState st = solve_steady_state(m, params, solver_cfg);
  ScalarField theta = st.theta;
  double F = total_population(st);

  int stalled = 0;
  double step = 0.0;
  for (int it = 0;; ++it) {
    const AdjointState adj = solve_adjoint(m, theta, params);
    const ScalarField g = objective_gradient(theta, adj);
    FieldPerturbation dir = best_perturbation(g, m);
    run.trajectory.push_back({F, step, dir.value});

    if (dir.value < cfg.stop_lp_value) {
      run.termination = Termination::LpValue;
      break;
    }
    if (stalled >= cfg.stall_window) {
      run.termination = Termination::RelativeObjective;
      break;
    }
    if (it == cfg.max_outer_iters) {
      run.termination = Termination::IterationCap;
      break;
    }
    AscentStep next = armijo_ascent_step(m, theta, dir.xi, F, dir.value, params, cfg, solver_cfg);
    if (next.step == 0.0) {
      run.termination = Termination::StepFailure;
      break;
    }
    const double rel = std::abs(next.F - F) / std::max(std::abs(F), 1e-300);
    stalled = rel < cfg.stop_rel_objective ? stalled + 1 : 0;
    m = std::move(next.m);
    theta = std::move(next.theta);
    F = next.F;
    step = next.step;
  }
  run.m = std::move(m);
  run.theta = std::move(theta);
  run.F = F;
  return run;
}

OptimRun optimize(const ProblemParams& params, const Grid& grid, const OptimConfig& cfg,
                  const SolverConfig& solver_cfg) {
  params.validate();
  cfg.validate();
  solver_cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.starts);
  std::vector<StartRun> runs(n);
  parallel_for(n, [&](std::size_t j) {
    StartRun& out = runs[j];
    try {
      ResourceField init = random_fourier_guess(grid, params.kappa, params.m0, cfg.seed, j);
      out = ascend(init, params, cfg, solver_cfg);
    } catch (const std::exception& e) {
      out = StartRun{};
      out.termination = Termination::Failed;
      out.error = e.what();
    }
    out.start_index = j;
    out.seed = substream_seed(cfg.seed, j);
  });

  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < n; ++j) {
    if (runs[j].termination == Termination::Failed) continue;
    if (!best || runs[j].F > runs[*best].F) best = j;
  }
  if (!best) {
    throw Error("all " + std::to_string(n) + " starts failed; first error: " + runs[0].error);
  }
  const StartRun& b = runs[*best];
  OptimRun out{*b.m, *b.theta, b.F, b.trajectory, b.termination, b.start_index, b.seed, {}};
  out.starts = std::move(runs);
  return out;
}

}  // namespace kppfrag
