#pragma once

#include <optional>

#include "kppfrag/grid.hpp"

namespace kppfrag {

struct SolverConfig {
  /// Infinity-norm tolerance on the discrete residual. The tolerance actually
  /// enforced is raised to the rounding floor of the stencil when mu/h^2 is
  /// large enough that 1e-11 is below what double precision can resolve.
  double newton_tol = 1e-11;
  int max_newton_iters = 100;
  /// Smallest backtracking factor tried by the Newton line search.
  double min_damping = 0x1p-20;
  double positivity_floor = 1e-14;
  int fallback_steps = 200;
  double fallback_dt = 0.1;

  void validate() const;
};

struct SteadyState {
  ScalarField theta;
  double residual_norm = 0.0;
  /// Tolerance the residual was checked against (see SolverConfig::newton_tol).
  double tolerance = 0.0;
  int iterations = 0;
  bool used_fallback = false;
};

/// R(theta) = mu*Lap(theta) + theta*(m - theta).
std::vector<double> steady_state_residual(const ScalarField& theta, const ResourceField& m,
                                          double mu);

/// Positive solution of mu*Lap(theta) + theta*(m - theta) = 0 by damped Newton
/// started from `initial` (default: the constant m0), with a pseudo-time
/// continuation fallback.
///
/// Throws NonPositiveMeanResource when mean(m) <= 0 and NoConvergence when
/// both stages fail.
SteadyState solve_steady_state(const ResourceField& m, const ProblemParams& params,
                               const SolverConfig& cfg = {},
                               const std::optional<ScalarField>& initial = std::nullopt);

/// Mean of the converged population.
double total_population(const SteadyState& state);

/// |mu*Q(theta) - (mean(theta) - m0)| where Q approximates the mean of
/// |grad theta|^2/theta^2 with edge differences over the lower-index node
/// value. First-order accurate.
double lou_identity_residual(const SteadyState& state, const ResourceField& m,
                             const ProblemParams& params);

/// Discrete energy whose stationary points are the steady states:
///   J(theta) = mu/2 theta^T (-W Lap) theta - sum_i w_i (theta_i^2 m_i/2 - theta_i^3/3)
/// with unnormalised trapezoid node weights w (1 inside, 1/2 per boundary axis).
double energy(const ScalarField& theta, const ResourceField& m, const ProblemParams& params);

/// Gradient of energy(): -W R(theta).
std::vector<double> energy_gradient(const ScalarField& theta, const ResourceField& m,
                                    const ProblemParams& params);

/// Preconditioned projected gradient descent on the energy, started from the
/// constant m0. Each step is the linearly implicit pseudo-time step
///   (I - dt*mu*Lap + dt*diag(theta)) theta_new = theta + dt*theta*m,
/// followed by projection onto theta >= positivity_floor. The same step drives
/// the continuation fallback of solve_steady_state().
ScalarField energy_descent_guess(const ResourceField& m, const ProblemParams& params,
                                 int iters = 60, double dt = 1.0,
                                 double positivity_floor = 1e-14);

}  // namespace kppfrag
