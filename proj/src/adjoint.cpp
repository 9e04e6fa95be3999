#include "kppfrag/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kppfrag/errors.hpp"
#include "kppfrag/laplacian.hpp"

namespace kppfrag {

AdjointState solve_adjoint(const ResourceField& m, const ScalarField& theta,
                           const ProblemParams& params) {
  const Grid& g = m.grid();
  if (!(g == theta.grid())) throw InvalidArgument("theta and m on different grids");
  const std::size_t n = g.size();
  NeumannLaplacian lap(g);
  ShiftedLaplacianSolver solver(g);

  std::vector<double> shift(n);
  double shift_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    shift[k] = 2.0 * theta[k] - m[k];
    shift_max = std::max(shift_max, std::abs(shift[k]));
  }
  if (!solver.factorize(-params.mu, shift)) {
    throw SingularAdjoint("adjoint matrix is singular; theta is not a stable steady state");
  }
  const std::vector<double> ones(n, 1.0);
  std::vector<double> p = solver.solve(ones);

  auto residual = [&](const std::vector<double>& x) {
    std::vector<double> r = lap.apply(x);
    for (std::size_t k = 0; k < n; ++k) r[k] = 1.0 - (-params.mu * r[k] + shift[k] * x[k]);
    return r;
  };
  // One step of iterative refinement.
  std::vector<double> r = residual(p);
  const std::vector<double> corr = solver.solve(r);
  for (std::size_t k = 0; k < n; ++k) p[k] += corr[k];
  r = residual(p);

  double rmax = 0.0, pmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(p[k])) throw SingularAdjoint("adjoint solve produced non-finite values");
    rmax = std::max(rmax, std::abs(r[k]));
    pmax = std::max(pmax, std::abs(p[k]));
  }
  const double anorm = params.mu * lap.norm_inf() + shift_max;
  const double backward = rmax / (anorm * pmax + 1.0);
  if (backward > 1e-10) {
    std::ostringstream os;
    os << "adjoint solve inaccurate (backward error " << backward << ")";
    throw SingularAdjoint(os.str());
  }
  return AdjointState{ScalarField(g, std::move(p)), backward};
}

ScalarField objective_gradient(const ScalarField& theta, const AdjointState& adj) {
  const Grid& g = theta.grid();
  if (!(g == adj.p.grid())) throw InvalidArgument("theta and p on different grids");
  std::vector<double> grad(g.size());
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = g.weight(k) * adj.p[k] * theta[k];
  return ScalarField(g, std::move(grad));
}

}  // namespace kppfrag
