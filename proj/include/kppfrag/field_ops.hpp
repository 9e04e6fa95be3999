#pragma once

#include <cstddef>
#include <functional>

#include "kppfrag/grid.hpp"

namespace kppfrag {

/// Quadrature mean over the unit box with trapezoid node weights.
double mean(const ScalarField& field);

/// Weighted L1 distance between two fields on the same grid.
double l1_distance(const ScalarField& a, const ScalarField& b);

/// Discrete total variation. 1D: sum of |v[i+1]-v[i]|. 2D: anisotropic,
/// each neighbour difference scaled by the spacing of the transverse axis.
double bv_seminorm(const ScalarField& field);

/// L1 norm plus total variation.
double bv_norm(const ScalarField& field);

/// Sign changes of (value - threshold) along a 1D field. A node counts as
/// "high" when its value is strictly above the threshold.
int jump_count(const ScalarField& field, double threshold);

/// Fraction of nodes with value strictly inside (0.05*kappa, 0.95*kappa).
double near_bangbang_fraction(const ScalarField& field, double kappa);

/// Even 2-periodic extension evaluated at 2^k x, on the same grid.
/// Requires (N-1) divisible by 2^k on every axis.
ScalarField periodise(const ScalarField& field, int k);

/// Same folding map, but onto the grid refined by 2^k so that every input
/// node is reproduced. The discrete steady-state problem on the output is
/// the exact fold of the input problem.
ScalarField periodise_refined(const ScalarField& field, int k);

/// Nodal samples of fn(x, y) (y is 0 in 1D).
ScalarField sample(const Grid& grid, const std::function<double(double, double)>& fn);

/// Left-anchored block kappa*1_(0,l) with kappa*l = m0. The node that
/// straddles the edge takes a fractional value so the mean is exactly m0.
ScalarField crenel(const Grid& grid, double kappa, double m0);

}  // namespace kppfrag
