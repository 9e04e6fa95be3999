#pragma once

#include <memory>
#include <span>
#include <vector>

#include "kppfrag/grid.hpp"

namespace kppfrag {

/// Discrete Neumann Laplacian on a node-centred grid.
///
/// In 1D this is the (1,-2,1)/h^2 stencil with boundary rows (-2,2)/h^2 and
/// (2,-2)/h^2 (mirrored ghost nodes). In 2D it is the Kronecker sum of the
/// two axis operators. The operator is not symmetric, but W*Lap is, where W
/// holds the trapezoid node weights.
class NeumannLaplacian {
 public:
  explicit NeumannLaplacian(Grid grid);

  const Grid& grid() const noexcept { return grid_; }

  void apply(std::span<const double> v, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> v) const;
  ScalarField apply(const ScalarField& field) const;

  /// Row-major dense assembly. Meant for small grids in tests.
  std::vector<double> dense() const;

  /// Maximum absolute row sum.
  double norm_inf() const;

 private:
  Grid grid_;
};

/// Direct solver for (alpha*Lap + diag(d)) x = b.
///
/// 1D uses a pivoted tridiagonal LU. 2D factors the weight-symmetrised system
/// W*(alpha*Lap + diag(d)) with a sparse LDL^T, falling back to sparse LU when
/// the LDL^T breaks down. The sparsity pattern is analysed once per solver.
class ShiftedLaplacianSolver {
 public:
  explicit ShiftedLaplacianSolver(Grid grid);
  ~ShiftedLaplacianSolver();
  ShiftedLaplacianSolver(ShiftedLaplacianSolver&&) noexcept;
  ShiftedLaplacianSolver& operator=(ShiftedLaplacianSolver&&) noexcept;

  /// Returns false when the matrix is numerically singular.
  bool factorize(double alpha, std::span<const double> diag);

  std::vector<double> solve(std::span<const double> rhs) const;

  const Grid& grid() const noexcept { return grid_; }

 private:
  struct Impl;
  Grid grid_;
  std::unique_ptr<Impl> impl_;
};

/// LU with partial pivoting of a tridiagonal matrix (LAPACK gttrf layout).
class TridiagonalLU {
 public:
  /// sub and super have n-1 entries; diag has n. Returns false on a zero pivot.
  bool factor(std::vector<double> sub, std::vector<double> diag, std::vector<double> super);
  void solve_in_place(std::span<double> b) const;
  std::size_t size() const noexcept { return d_.size(); }

 private:
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<std::size_t> ipiv_;
};

}  // namespace kppfrag
