#pragma once

#include <span>
#include <vector>

#include "kppfrag/grid.hpp"

namespace kppfrag {

struct Perturbation {
  std::vector<double> xi;
  double value = 0.0;
};

/// Exact solution of the direction linear program
///
///   maximise sum_i g_i xi_i
///   s.t.     -m_i <= xi_i <= kappa - m_i,   sum_i w_i xi_i = 0.
///
/// Threshold method: nodes are ranked by g_i/w_i (descending, ties by
/// ascending index). Nodes ranked above the threshold group go to their upper
/// bound, nodes below to their lower bound, and the threshold group absorbs
/// the balance starting from xi = 0, lowest index first. An empty `weights`
/// span means unit weights.
Perturbation best_perturbation(std::span<const double> g, std::span<const double> m,
                               double kappa, std::span<const double> weights = {});

/// Field form: the budget constraint uses the grid's quadrature weights, so
/// m + xi keeps the mean of m.
struct FieldPerturbation {
  ScalarField xi;
  double value = 0.0;
};
FieldPerturbation best_perturbation(const ScalarField& g, const ResourceField& m);

}  // namespace kppfrag
