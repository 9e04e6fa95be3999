#pragma once

#include "kppfrag/grid.hpp"

namespace kppfrag {

struct AdjointState {
  ScalarField p;
  /// Normwise backward error ||1 - A p|| / (||A|| ||p|| + 1) of the solve.
  double residual_norm = 0.0;
};

/// Solves -mu*Lap(p) - (m - 2 theta) p = 1.
///
/// Because W*Lap is symmetric for the trapezoid weights W, this is exactly
/// the discrete adjoint of the weighted mean of theta. Throws SingularAdjoint
/// if the factorisation breaks down or the backward error exceeds 1e-10.
AdjointState solve_adjoint(const ResourceField& m, const ScalarField& theta,
                           const ProblemParams& params);

/// Nodal gradient g_i = w_i p_i theta_i of F = mean(theta) with respect to m,
/// so that dF[xi] = sum_i g_i xi_i.
ScalarField objective_gradient(const ScalarField& theta, const AdjointState& adj);

}  // namespace kppfrag
