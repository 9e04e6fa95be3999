#include "kppfrag/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"
#include "kppfrag/laplacian.hpp"

namespace kppfrag {

namespace {

double norm_inf(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
};

double rounding_floor(const NeumannLaplacian& lap, double mu, const std::vector<double>& theta,
                      const ResourceField& m) {
  const double tmax = norm_inf(theta);
  const double mmax = norm_inf(m.values());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return 32.0 * eps * (mu * lap.norm_inf() + mmax + tmax) * std::max(tmax, 1e-300);
}

void residual_into(const NeumannLaplacian& lap, std::span<const double> theta,
                   std::span<const double> m, double mu, std::span<double> out) {
  lap.apply(theta, out);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = mu * out[k] + theta[k] * (m[k] - theta[k]);
  }
}

NewtonOutcome newton(const NeumannLaplacian& lap, ShiftedLaplacianSolver& solver,
                     const ResourceField& m, double mu, const SolverConfig& cfg,
                     std::vector<double>& theta) {
  const std::size_t n = theta.size();
  const auto mv = m.values();
  std::vector<double> r(n), shift(n), cand(n), rc(n);
  NewtonOutcome out;
  residual_into(lap, theta, mv, mu, r);
  double rnorm = norm_inf(r);
  bool clipped = false;
  for (int it = 0;; ++it) {
    out.iterations = it;
    out.residual = rnorm;
    out.tolerance = std::max(cfg.newton_tol, rounding_floor(lap, mu, theta, m));
    if (rnorm <= out.tolerance) {
      // The trivial branch theta = 0 also has a tiny residual; the positive
      // solution has mean(theta) >= mean(m).
      const double tmin = *std::min_element(theta.begin(), theta.end());
      double avg = 0.0;
      for (std::size_t k = 0; k < n; ++k) avg += m.grid().weight(k) * theta[k];
      out.converged = tmin > 0.0 && !clipped && avg > 1e-3 * mean(m.field());
      return out;
    }
    if (it == cfg.max_newton_iters) return out;

    for (std::size_t k = 0; k < n; ++k) shift[k] = mv[k] - 2.0 * theta[k];
    if (!solver.factorize(mu, shift)) return out;
    for (std::size_t k = 0; k < n; ++k) r[k] = -r[k];
    const std::vector<double> delta = solver.solve(r);

    // Fraction-to-boundary: a full step may at most shrink a node by 95%.
    double t0 = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (delta[k] < 0.0) t0 = std::min(t0, 0.95 * theta[k] / -delta[k]);
    }
    if (t0 < cfg.min_damping) {
      out.iterations = it + 1;
      return out;
    }
    bool accepted = false;
    for (double t = t0; t >= cfg.min_damping; t *= 0.5) {
      bool cut = false;
      for (std::size_t k = 0; k < n; ++k) {
        cand[k] = theta[k] + t * delta[k];
        if (!(cand[k] >= cfg.positivity_floor)) {
          cand[k] = cfg.positivity_floor;
          cut = true;
        }
      }
      residual_into(lap, cand, mv, mu, rc);
      const double cn = norm_inf(rc);
      if (std::isfinite(cn) && cn <= (1.0 - 1e-4 * t) * rnorm) {
        theta.swap(cand);
        r.swap(rc);
        rnorm = cn;
        clipped = cut;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.iterations = it + 1;
      return out;
    }
  }
}

// One linearly implicit pseudo-time step
//   (I - dt*mu*Lap + dt*diag(theta)) theta_new = theta + dt*theta*m.
// The matrix is an M-matrix, so positive iterates stay positive for any dt.
bool pseudo_time_step(ShiftedLaplacianSolver& solver, std::span<const double> m, double mu,
                      double dt, double floor, std::vector<double>& theta) {
  const std::size_t n = theta.size();
  std::vector<double> diag(n), rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    diag[k] = 1.0 + dt * theta[k];
    rhs[k] = theta[k] + dt * theta[k] * m[k];
  }
  if (!solver.factorize(-dt * mu, diag)) return false;
  theta = solver.solve(rhs);
  for (double& v : theta) {
    if (!(v >= floor)) v = floor;
  }
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0) || !(positivity_floor > 0.0) || !(min_damping > 0.0) ||
      !(fallback_dt > 0.0)) {
    throw InvalidArgument("solver tolerances must be positive");
  }
  if (max_newton_iters < 1 || fallback_steps < 1) {
    throw InvalidArgument("solver iteration caps must be at least 1");
  }
}

std::vector<double> steady_state_residual(const ScalarField& theta, const ResourceField& m,
                                          double mu) {
  if (!(theta.grid() == m.grid())) throw InvalidArgument("theta and m on different grids");
  NeumannLaplacian lap(theta.grid());
  std::vector<double> r(theta.size());
  residual_into(lap, theta.values(), m.values(), mu, r);
  return r;
}

SteadyState solve_steady_state(const ResourceField& m, const ProblemParams& params,
                               const SolverConfig& cfg,
                               const std::optional<ScalarField>& initial) {
  cfg.validate();
  if (!(params.mu > 0.0)) throw InvalidArgument("diffusivity mu must be positive");
  const double m_mean = mean(m.field());
  if (!(m_mean > 0.0)) {
    throw NonPositiveMeanResource("steady state requires a resource with positive mean");
  }
  const Grid& grid = m.grid();
  NeumannLaplacian lap(grid);
  ShiftedLaplacianSolver solver(grid);

  std::vector<double> theta;
  if (initial) {
    if (!(initial->grid() == grid)) throw InvalidArgument("initial guess on a different grid");
    theta = initial->data();
    for (double& v : theta) v = std::max(v, cfg.positivity_floor);
  } else {
    theta.assign(grid.size(), m_mean);
  }

  NewtonOutcome first = newton(lap, solver, m, params.mu, cfg, theta);
  if (first.converged) {
    return SteadyState{ScalarField(grid, std::move(theta)), first.residual, first.tolerance,
                       first.iterations, false};
  }

  // Pseudo-time continuation towards the Newton basin.
  theta.assign(grid.size(), m_mean);
  double dt = cfg.fallback_dt;
  for (int s = 0; s < cfg.fallback_steps; ++s) {
    if (!pseudo_time_step(solver, m.values(), params.mu, dt, cfg.positivity_floor, theta)) {
      break;
    }
    dt = std::min(dt * 1.05, 100.0);
  }
  NewtonOutcome second = newton(lap, solver, m, params.mu, cfg, theta);
  if (second.converged) {
    return SteadyState{ScalarField(grid, std::move(theta)), second.residual, second.tolerance,
                       first.iterations + second.iterations, true};
  }
  std::ostringstream os;
  os << "steady-state solve failed (mu=" << params.mu << ", residual " << second.residual
     << " > " << second.tolerance << ")";
  throw NoConvergence(os.str(), second.residual);
}

double total_population(const SteadyState& state) { return mean(state.theta); }

double lou_identity_residual(const SteadyState& state, const ResourceField& m,
                             const ProblemParams& params) {
  const ScalarField& th = state.theta;
  const Grid& g = th.grid();
  if (!(g == m.grid())) throw InvalidArgument("theta and m on different grids");
  const auto v = th.values();
  auto edge_term = [](double a, double b, double h) {
    const double d = (b - a) / h;
    return d * d / (a * a);
  };
  double q = 0.0;
  if (g.dim() == 1) {
    const double h = g.hx();
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) q += h * edge_term(v[i], v[i + 1], h);
  } else {
    const double hx = g.hx();
    const double hy = g.hy();
    auto cross = [](std::size_t i, std::size_t n, double h) {
      return (i == 0 || i + 1 == n) ? 0.5 * h : h;
    };
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
      for (std::size_t ix = 0; ix < g.nx(); ++ix) {
        const std::size_t k = g.index(ix, iy);
        if (ix + 1 < g.nx()) q += hx * cross(iy, g.ny(), hy) * edge_term(v[k], v[k + 1], hx);
        if (iy + 1 < g.ny()) {
          q += hy * cross(ix, g.nx(), hx) * edge_term(v[k], v[k + g.nx()], hy);
        }
      }
    }
  }
  return std::abs(params.mu * q - (mean(th) - params.m0));
}

double energy(const ScalarField& theta, const ResourceField& m, const ProblemParams& params) {
  const Grid& g = theta.grid();
  if (!(g == m.grid())) throw InvalidArgument("theta and m on different grids");
  NeumannLaplacian lap(g);
  const std::vector<double> lt = lap.apply(theta.values());
  double quad = 0.0;
  double reaction = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double w = g.node_weight(k);
    const double t = theta[k];
    quad += w * t * (-lt[k]);
    reaction += w * (0.5 * t * t * m[k] - t * t * t / 3.0);
  }
  return 0.5 * params.mu * quad - reaction;
}

std::vector<double> energy_gradient(const ScalarField& theta, const ResourceField& m,
                                    const ProblemParams& params) {
  std::vector<double> r = steady_state_residual(theta, m, params.mu);
  const Grid& g = theta.grid();
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = -g.node_weight(k) * r[k];
  return r;
}

ScalarField energy_descent_guess(const ResourceField& m, const ProblemParams& params, int iters,
                                 double dt, double positivity_floor) {
  const Grid& g = m.grid();
  const double start = std::max(mean(m.field()), positivity_floor);
  std::vector<double> theta(g.size(), start);
  ShiftedLaplacianSolver solver(g);
  for (int it = 0; it < iters; ++it) {
    if (!pseudo_time_step(solver, m.values(), params.mu, dt, positivity_floor, theta)) break;
  }
  return ScalarField(g, std::move(theta));
}

}  // namespace kppfrag
