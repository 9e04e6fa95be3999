#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"
#include "kppfrag/laplacian.hpp"
#include "kppfrag/random_guess.hpp"
#include "kppfrag/steady_state.hpp"

using namespace kppfrag;

namespace {

// Continuum value of mean(theta) for m = 1_(0,0.3), mu = 0.01, from
// tests/oracles/crenel_bvp.py (two-piece collocation, tol 1e-10).
constexpr double kCrenelBvpF = 0.3866132808348;

Eigen::MatrixXd dense_matrix(const Grid& g) {
  const std::vector<double> d = NeumannLaplacian(g).dense();
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = d[static_cast<std::size_t>(r * n + c)];
  }
  return a;
}

// Eigenvalues of the node-centred Neumann operator on one axis.
std::vector<double> axis_spectrum(std::size_t n) {
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(k) / (2.0 * (n - 1)));
    out.push_back(-4.0 / (h * h) * s * s);
  }
  return out;
}

double norm_inf(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

ResourceField crenel_field(std::size_t n, double kappa = 1.0, double m0 = 0.3) {
  return ResourceField(crenel(Grid::line(n), kappa, m0), kappa, m0);
}

}  // namespace

TEST_CASE("laplacian spectrum: dense eigensolver oracle") {
  for (std::size_t n : {3u, 4u, 10u, 33u, 50u}) {
    const Grid g = Grid::line(n);
    const Eigen::MatrixXd a = dense_matrix(g);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    REQUIRE(es.info() == Eigen::Success);
    std::vector<double> ev;
    const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      CHECK(std::abs(es.eigenvalues()(i).imag()) <= 1e-10 * scale);
      CHECK(es.eigenvalues()(i).real() <= 1e-10 * scale);
      ev.push_back(es.eigenvalues()(i).real());
    }
    std::sort(ev.begin(), ev.end());
    std::vector<double> exact = axis_spectrum(n);
    std::sort(exact.begin(), exact.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(ev[i] == doctest::Approx(exact[i]).epsilon(1e-9).scale(scale));
    CHECK(NeumannLaplacian(g).norm_inf() == doctest::Approx(scale));
  }

  SUBCASE("2D spectrum is the Kronecker sum") {
    const Grid g = Grid::square(6, 5);
    const Eigen::MatrixXd a = dense_matrix(g);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    std::vector<double> ev;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()(i).real());
    std::vector<double> exact;
    for (double lx : axis_spectrum(6)) {
      for (double ly : axis_spectrum(5)) exact.push_back(lx + ly);
    }
    std::sort(ev.begin(), ev.end());
    std::sort(exact.begin(), exact.end());
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(ev[i] == doctest::Approx(exact[i]).scale(200));
  }
}

TEST_CASE("laplacian: power iteration finds -4/h^2 at N=1000") {
  const Grid g = Grid::line(1000);
  const NeumannLaplacian lap(g);
  Rng rng(2024);
  std::vector<double> v(g.size()), w(g.size());
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  double rq = 0.0;
  for (int it = 0; it < 3000; ++it) {
    lap.apply(v, w);
    double num = 0.0, den = 0.0, nrm = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      num += g.weight(k) * v[k] * w[k];
      den += g.weight(k) * v[k] * v[k];
      nrm = std::max(nrm, std::abs(w[k]));
    }
    rq = num / den;
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = w[k] / nrm;
  }
  const double h = g.hx();
  CHECK(std::abs(rq - (-4.0 / (h * h))) <= 0.01 * 4.0 / (h * h));
}

TEST_CASE("laplacian is self-adjoint in the trapezoid inner product") {
  for (const Grid& g : {Grid::line(9), Grid::square(5, 4)}) {
    const Eigen::MatrixXd a = dense_matrix(g);
    Eigen::VectorXd wts(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) wts(static_cast<Eigen::Index>(k)) = g.weight(k);
    const Eigen::MatrixXd wa = wts.asDiagonal() * a;
    CHECK((wa - wa.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * wa.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("shifted solver matches a dense LU") {
  Rng rng(11);
  for (const Grid& g : {Grid::line(40), Grid::square(7, 6), Grid::square(12, 12)}) {
    const auto n = static_cast<Eigen::Index>(g.size());
    for (double alpha : {0.01, -0.5, 1.0}) {
      std::vector<double> d(g.size()), b(g.size());
      // Indefinite shifts like m - 2 theta as well as positive ones.
      for (double& x : d) x = rng.uniform(-1.0, 1.0) + (alpha < 0 ? 2.0 : 0.0);
      for (double& x : b) x = rng.uniform(-1.0, 1.0);
      ShiftedLaplacianSolver solver(g);
      REQUIRE(solver.factorize(alpha, d));
      const std::vector<double> x = solver.solve(b);

      Eigen::MatrixXd a = alpha * dense_matrix(g);
      for (Eigen::Index i = 0; i < n; ++i) a(i, i) += d[static_cast<std::size_t>(i)];
      const Eigen::VectorXd ref =
          a.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
      const double cond_scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(std::abs(x[static_cast<std::size_t>(i)] - ref(i)) <= 1e-9 * cond_scale);
      }
    }
  }
}

TEST_CASE("tridiagonal LU pivots past a zero diagonal") {
  TridiagonalLU lu;
  REQUIRE(lu.factor({1.0, 1.0}, {0.0, 0.0, 1.0}, {1.0, 1.0}));
  // [[0,1,0],[1,0,1],[0,1,1]] x = (1, 2, 3) has x = (0, 1, 2).
  std::vector<double> b = {1.0, 2.0, 3.0};
  lu.solve_in_place(b);
  CHECK(b[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(b[1] == doctest::Approx(1.0));
  CHECK(b[2] == doctest::Approx(2.0));
  CHECK_FALSE(lu.factor({0.0}, {0.0, 1.0}, {0.0}));
}

TEST_CASE("constant resource gives the constant population") {
  const Grid g = Grid::line(200);
  for (double m0 : {0.3, 0.6}) {
    const ResourceField m(ScalarField(g, m0), 1.0, m0);
    for (double mu : {1e-3, 1.0, 1e3}) {
      const SteadyState s = solve_steady_state(m, {mu, 1.0, m0});
      CHECK(s.iterations <= 2);
      CHECK_FALSE(s.used_fallback);
      CHECK(std::abs(total_population(s) - m0) <= 1e-12);
      CHECK(lou_identity_residual(s, m, {mu, 1.0, m0}) <= 1e-14);
    }
  }
  // Saturated limit m = kappa.
  const ResourceField full(ScalarField(g, 1.0), 1.0, 1.0);
  const SteadyState s = solve_steady_state(full, {0.1, 1.0, 1.0});
  CHECK(std::abs(total_population(s) - 1.0) <= 1e-12);

  const Grid sq = Grid::square(15, 15);
  const ResourceField m2(ScalarField(sq, 0.3), 1.0, 0.3);
  CHECK(std::abs(total_population(solve_steady_state(m2, {0.05, 1.0, 0.3})) - 0.3) <= 1e-12);
}

TEST_CASE("crenel objective: grid-refinement and continuum oracles") {
  const ProblemParams p{0.01, 1.0, 0.3};
  std::vector<double> F;
  for (std::size_t n : {1000u, 2000u, 4000u, 8000u}) {
    const ResourceField m = crenel_field(n);
    const SteadyState s = solve_steady_state(m, p);
    CHECK(s.residual_norm <= s.tolerance);
    F.push_back(total_population(s));
  }
  // Second order: successive differences shrink by about 4.
  const double r1 = (F[1] - F[0]) / (F[2] - F[1]);
  const double r2 = (F[2] - F[1]) / (F[3] - F[2]);
  CHECK(r1 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(r2 == doctest::Approx(4.0).epsilon(0.15));

  const double richardson = F[3] + (F[3] - F[2]) / 3.0;
  CHECK(std::abs(richardson - kCrenelBvpF) <= 1e-9);
  CHECK(std::abs(F[0] - richardson) <= 1e-4);
  CHECK(std::abs(F[0] - kCrenelBvpF) <= 1e-6);
  // Frozen regression value of the main build.
  CHECK(F[0] == doctest::Approx(0.386613180689).epsilon(1e-10));
}

TEST_CASE("steady state contracts") {
  SUBCASE("bounds and maximum principle on random resources") {
    const Grid g = Grid::line(257);
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const ResourceField m = random_fourier_guess(g, 1.0, 0.3, seed);
      const double mu = std::pow(10.0, -3.0 + 5.0 * static_cast<double>(seed) / 11.0);
      const SteadyState s = solve_steady_state(m, {mu, 1.0, 0.3});
      const auto [lo, hi] = std::minmax_element(s.theta.data().begin(), s.theta.data().end());
      CHECK(*lo > 0.0);
      CHECK(*hi <= 1.0 + 1e-8);
      CHECK(total_population(s) > 0.3);
      CHECK(norm_inf(steady_state_residual(s.theta, m, mu)) <= s.tolerance);
    }
  }

  SUBCASE("2D solve") {
    const Grid g = Grid::square(30, 30);
    const ResourceField m = random_fourier_guess(g, 1.0, 0.3, 5);
    const SteadyState s = solve_steady_state(m, {0.01, 1.0, 0.3});
    CHECK(s.residual_norm <= s.tolerance);
    CHECK(*std::min_element(s.theta.data().begin(), s.theta.data().end()) > 0.0);
    CHECK(total_population(s) > 0.3);
    CHECK(total_population(s) < 1.0);
  }

  SUBCASE("errors") {
    const Grid g = Grid::line(50);
    const ResourceField zero(ScalarField(g, 0.0), 1.0, 0.0);
    CHECK_THROWS_AS(solve_steady_state(zero, {0.1, 1.0, 0.3}), NonPositiveMeanResource);
    const ResourceField m = crenel_field(50);
    CHECK_THROWS_AS(solve_steady_state(m, {0.0, 1.0, 0.3}), InvalidArgument);

    SolverConfig starved;
    starved.max_newton_iters = 1;
    starved.fallback_steps = 1;
    try {
      (void)solve_steady_state(crenel_field(2000), {1e-4, 1.0, 0.3}, starved);
      FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
      CHECK(e.last_residual() > 0.0);
    }
    SolverConfig bad;
    bad.newton_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = SolverConfig{};
    bad.max_newton_iters = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }

  SUBCASE("bit-identical repeats") {
    const ResourceField m = crenel_field(1000);
    const SteadyState a = solve_steady_state(m, {0.01, 1.0, 0.3});
    const SteadyState b = solve_steady_state(m, {0.01, 1.0, 0.3});
    CHECK(a.theta == b.theta);
    CHECK(a.iterations == b.iterations);
    CHECK(a.residual_norm == b.residual_norm);
  }
}

TEST_CASE("lou identity residual") {
  const ResourceField m = crenel_field(1000);
  const ProblemParams p{0.01, 1.0, 0.3};
  CHECK(lou_identity_residual(solve_steady_state(m, p), m, p) <= 5e-3);

  // First order on a smooth resource.
  auto smooth = [](std::size_t n) {
    const ScalarField f =
        sample(Grid::line(n), [](double x, double) { return 0.3 + 0.2 * std::cos(std::numbers::pi * x); });
    return ResourceField::clamped(f, 1.0, mean(f));
  };
  const ResourceField a = smooth(500), b = smooth(1000);
  const ProblemParams pa{0.05, 1.0, a.m0()}, pb{0.05, 1.0, b.m0()};
  const double ra = lou_identity_residual(solve_steady_state(a, pa), a, pa);
  const double rb = lou_identity_residual(solve_steady_state(b, pb), b, pb);
  CHECK(rb / ra == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("energy") {
  const Grid g = Grid::line(64);
  const ResourceField m(ScalarField(g, 0.3), 1.0, 0.3);
  const ProblemParams p{0.1, 1.0, 0.3};
  CHECK(energy(ScalarField(g, 0.0), m, p) == 0.0);
  const double c = 0.7;
  // Node weights sum to N-1 (endpoints count 1/2).
  CHECK(energy(ScalarField(g, c), m, p) ==
        doctest::Approx(-63.0 * (c * c * 0.3 / 2 - c * c * c / 3)));

  const ResourceField cr = crenel_field(64);
  const SteadyState s = solve_steady_state(cr, p);
  CHECK(norm_inf(energy_gradient(s.theta, cr, p)) <= 1e-8);

  // Analytic gradient against central differences away from the steady state.
  std::vector<double> th(g.size());
  Rng rng(3);
  for (double& v : th) v = rng.uniform(0.1, 0.9);
  const ScalarField theta(g, th);
  const std::vector<double> grad = energy_gradient(theta, cr, p);
  for (std::size_t k : {0u, 1u, 31u, 62u, 63u}) {
    const double eps = 1e-6;
    std::vector<double> up = th, dn = th;
    up[k] += eps;
    dn[k] -= eps;
    const double fd = (energy(ScalarField(g, up), cr, p) - energy(ScalarField(g, dn), cr, p)) / (2 * eps);
    CHECK(fd == doctest::Approx(grad[k]).epsilon(1e-6).scale(1e-6));
  }
}

TEST_CASE("energy descent warm start") {
  const Grid g = Grid::line(300);
  const ResourceField m(ScalarField(g, 0.3), 1.0, 0.3);
  const ScalarField guess = energy_descent_guess(m, {0.1, 1.0, 0.3});
  for (double v : guess.values()) CHECK(std::abs(v - 0.3) <= 1e-3);

  const ResourceField cr = crenel_field(1000);
  const ProblemParams p{0.01, 1.0, 0.3};
  const ScalarField warm = energy_descent_guess(cr, p);
  for (double v : warm.values()) CHECK(v >= 1e-14);
  const SteadyState s = solve_steady_state(cr, p, {}, warm);
  CHECK(s.iterations <= 15);
  CHECK_FALSE(s.used_fallback);
  CHECK(total_population(s) == doctest::Approx(0.386613180689).epsilon(1e-10));
}

TEST_CASE("stability ratio report") {
  // ||theta_m - theta_m'||_1 / ||m - m'||_1^(1/3) is bounded in theory with an
  // unknown constant; report the largest value seen.
  const Grid g = Grid::line(257);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ResourceField a = random_fourier_guess(g, 1.0, 0.3, s, 0);
    const ResourceField b = random_fourier_guess(g, 1.0, 0.3, s, 1);
    const double mu = s % 2 ? 0.01 : 0.1;
    const SteadyState ta = solve_steady_state(a, {mu, 1.0, 0.3});
    const SteadyState tb = solve_steady_state(b, {mu, 1.0, 0.3});
    const double ratio = l1_distance(ta.theta, tb.theta) / std::cbrt(l1_distance(a.field(), b.field()));
    CHECK(std::isfinite(ratio));
    worst = std::max(worst, ratio);
  }
  MESSAGE("max stability ratio over 20 random pairs: " << worst);
  CHECK(worst > 0.0);
}
