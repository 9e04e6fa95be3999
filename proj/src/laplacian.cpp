#include "kppfrag/laplacian.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <optional>

#include "kppfrag/errors.hpp"

namespace kppfrag {

NeumannLaplacian::NeumannLaplacian(Grid grid) : grid_(std::move(grid)) {}

void NeumannLaplacian::apply(std::span<const double> v, std::span<double> out) const {
  const std::size_t nx = grid_.nx();
  const std::size_t ny = grid_.ny();
  if (v.size() != grid_.size() || out.size() != grid_.size()) {
    throw InvalidArgument("Laplacian applied to a vector of the wrong size");
  }
  const double cx = 1.0 / (grid_.hx() * grid_.hx());
  const double cy = grid_.dim() == 2 ? 1.0 / (grid_.hy() * grid_.hy()) : 0.0;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = grid_.index(ix, iy);
      const double left = v[ix == 0 ? k + 1 : k - 1];
      const double right = v[ix + 1 == nx ? k - 1 : k + 1];
      double acc = cx * (left - 2.0 * v[k] + right);
      if (grid_.dim() == 2) {
        const double down = v[iy == 0 ? k + nx : k - nx];
        const double up = v[iy + 1 == ny ? k - nx : k + nx];
        acc += cy * (down - 2.0 * v[k] + up);
      }
      out[k] = acc;
    }
  }
}

std::vector<double> NeumannLaplacian::apply(std::span<const double> v) const {
  std::vector<double> out(v.size());
  apply(v, out);
  return out;
}

ScalarField NeumannLaplacian::apply(const ScalarField& field) const {
  return ScalarField(grid_, apply(field.values()));
}

std::vector<double> NeumannLaplacian::dense() const {
  const std::size_t n = grid_.size();
  std::vector<double> a(n * n, 0.0);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) a[i * n + j] = col[i];
  }
  return a;
}

double NeumannLaplacian::norm_inf() const {
  double r = 4.0 / (grid_.hx() * grid_.hx());
  if (grid_.dim() == 2) r += 4.0 / (grid_.hy() * grid_.hy());
  return r;
}

bool TridiagonalLU::factor(std::vector<double> sub, std::vector<double> diag,
                           std::vector<double> super) {
  const std::size_t n = diag.size();
  dl_ = std::move(sub);
  d_ = std::move(diag);
  du_ = std::move(super);
  du2_.assign(n > 2 ? n - 2 : 0, 0.0);
  ipiv_.resize(n);
  for (std::size_t i = 0; i < n; ++i) ipiv_[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      if (d_[i] == 0.0) return false;
      const double fact = dl_[i] / d_[i];
      dl_[i] = fact;
      d_[i + 1] -= fact * du_[i];
    } else {
      const double fact = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = fact;
      const double temp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = temp - fact * d_[i + 1];
      if (i + 2 < n) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -fact * du_[i + 1];
      }
      ipiv_[i] = i + 1;
    }
  }
  for (double p : d_) {
    if (p == 0.0 || !std::isfinite(p)) return false;
  }
  return true;
}

void TridiagonalLU::solve_in_place(std::span<double> b) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (ipiv_[i] == i) {
      b[i + 1] -= dl_[i] * b[i];
    } else {
      const double temp = b[i] - dl_[i] * b[i + 1];
      b[i] = b[i + 1];
      b[i + 1] = temp;
    }
  }
  b[n - 1] /= d_[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
  for (std::size_t i = n - 2; i-- > 0;) {
    b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
  }
}

struct ShiftedLaplacianSolver::Impl {
  using SpMat = Eigen::SparseMatrix<double>;

  // 1D
  TridiagonalLU tri;

  // 2D
  SpMat matrix;
  std::vector<double> node_weights;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  std::optional<Eigen::SparseLU<SpMat>> lu;
  bool pattern_ready = false;
  bool use_lu = false;
};

ShiftedLaplacianSolver::ShiftedLaplacianSolver(Grid grid)
    : grid_(std::move(grid)), impl_(std::make_unique<Impl>()) {}

ShiftedLaplacianSolver::~ShiftedLaplacianSolver() = default;
ShiftedLaplacianSolver::ShiftedLaplacianSolver(ShiftedLaplacianSolver&&) noexcept = default;
ShiftedLaplacianSolver& ShiftedLaplacianSolver::operator=(ShiftedLaplacianSolver&&) noexcept =
    default;

bool ShiftedLaplacianSolver::factorize(double alpha, std::span<const double> diag) {
  const std::size_t n = grid_.size();
  if (diag.size() != n) throw InvalidArgument("shift diagonal has the wrong size");

  if (grid_.dim() == 1) {
    const double c = alpha / (grid_.hx() * grid_.hx());
    std::vector<double> sub(n - 1, c), d(n), sup(n - 1, c);
    for (std::size_t i = 0; i < n; ++i) d[i] = -2.0 * c + diag[i];
    sup[0] = 2.0 * c;
    sub[n - 2] = 2.0 * c;
    return impl_->tri.factor(std::move(sub), std::move(d), std::move(sup));
  }

  // Symmetrised 2D system: rows scaled by the unnormalised node weights.
  const std::size_t nx = grid_.nx();
  const std::size_t ny = grid_.ny();
  const double cx = alpha / (grid_.hx() * grid_.hx());
  const double cy = alpha / (grid_.hy() * grid_.hy());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  impl_->node_weights.resize(n);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = grid_.index(ix, iy);
      const double w = grid_.node_weight(k);
      impl_->node_weights[k] = w;
      const auto row = static_cast<Eigen::Index>(k);
      trip.emplace_back(row, row, w * (-2.0 * cx - 2.0 * cy + diag[k]));
      auto add = [&](std::size_t col, double coef) {
        trip.emplace_back(row, static_cast<Eigen::Index>(col), w * coef);
      };
      if (ix == 0) {
        add(k + 1, 2.0 * cx);
      } else if (ix + 1 == nx) {
        add(k - 1, 2.0 * cx);
      } else {
        add(k - 1, cx);
        add(k + 1, cx);
      }
      if (iy == 0) {
        add(k + nx, 2.0 * cy);
      } else if (iy + 1 == ny) {
        add(k - nx, 2.0 * cy);
      } else {
        add(k - nx, cy);
        add(k + nx, cy);
      }
    }
  }
  impl_->matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  impl_->matrix.setFromTriplets(trip.begin(), trip.end());
  impl_->matrix.makeCompressed();

  if (!impl_->pattern_ready) {
    impl_->ldlt.analyzePattern(impl_->matrix);
    impl_->pattern_ready = true;
  }
  impl_->ldlt.factorize(impl_->matrix);
  impl_->use_lu = false;
  if (impl_->ldlt.info() == Eigen::Success) {
    const auto& dvec = impl_->ldlt.vectorD();
    bool ok = true;
    const double scale = dvec.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < dvec.size(); ++i) {
      if (!std::isfinite(dvec[i]) || std::abs(dvec[i]) <= 1e-14 * scale) ok = false;
    }
    if (ok) return true;
  }
  impl_->lu.emplace();
  impl_->lu->analyzePattern(impl_->matrix);
  impl_->lu->factorize(impl_->matrix);
  impl_->use_lu = true;
  return impl_->lu->info() == Eigen::Success;
}

std::vector<double> ShiftedLaplacianSolver::solve(std::span<const double> rhs) const {
  const std::size_t n = grid_.size();
  if (rhs.size() != n) throw InvalidArgument("right-hand side has the wrong size");
  std::vector<double> x(rhs.begin(), rhs.end());
  if (grid_.dim() == 1) {
    impl_->tri.solve_in_place(x);
    return x;
  }
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) b[static_cast<Eigen::Index>(k)] = impl_->node_weights[k] * rhs[k];
  Eigen::VectorXd sol = impl_->use_lu ? Eigen::VectorXd(impl_->lu->solve(b))
                                      : Eigen::VectorXd(impl_->ldlt.solve(b));
  for (std::size_t k = 0; k < n; ++k) x[k] = sol[static_cast<Eigen::Index>(k)];
  return x;
}

}  // namespace kppfrag
