#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kppfrag {

/// Node-centred tensor grid on the unit interval or unit square.
///
/// Nodes include both endpoints, x_i = i*h with h = 1/(N-1). Storage is
/// row-major with x varying fastest: index(ix, iy) = iy*nx + ix.
class Grid {
 public:
  static Grid line(std::size_t nx);
  static Grid square(std::size_t nx, std::size_t ny);

  int dim() const noexcept { return dim_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double hx() const noexcept { return 1.0 / static_cast<double>(nx_ - 1); }
  double hy() const noexcept {
    return dim_ == 2 ? 1.0 / static_cast<double>(ny_ - 1) : 1.0;
  }
  double x(std::size_t ix) const noexcept { return static_cast<double>(ix) * hx(); }
  double y(std::size_t iy) const noexcept { return static_cast<double>(iy) * hy(); }
  std::size_t index(std::size_t ix, std::size_t iy = 0) const noexcept {
    return iy * nx_ + ix;
  }

  /// Trapezoid quadrature weight of node k, normalised so the weights sum to 1.
  double weight(std::size_t k) const noexcept;

  /// Unnormalised node weight: 1 in the interior, 1/2 per boundary axis.
  double node_weight(std::size_t k) const noexcept;

  /// Same geometry with every axis refined by `factor` (N-1 -> factor*(N-1)).
  Grid refined(std::size_t factor) const;

  bool operator==(const Grid&) const = default;

 private:
  Grid(int dim, std::size_t nx, std::size_t ny);

  int dim_;
  std::size_t nx_;
  std::size_t ny_;
};

/// Nodal values over a grid. Every entry is finite.
class ScalarField {
 public:
  ScalarField(Grid grid, std::vector<double> values);
  ScalarField(Grid grid, double constant);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  std::size_t size() const noexcept { return values_.size(); }

  bool operator==(const ScalarField&) const = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// (mu, kappa, m0) for one instance of the total-population problem.
struct ProblemParams {
  double mu;
  double kappa;
  double m0;

  /// Throws InvalidArgument unless mu > 0 and 0 < m0 < kappa.
  void validate() const;
};

/// A field in the admissible class: 0 <= m <= kappa with weighted mean m0.
class ResourceField {
 public:
  static constexpr double kBoundTol = 1e-12;
  static constexpr double kMeanTol = 1e-10;

  /// Validates bounds and mean; throws InvalidArgument on violation.
  ResourceField(ScalarField field, double kappa, double m0);

  /// Clamps rounding-level bound excursions (<= kBoundTol) before validating.
  static ResourceField clamped(ScalarField field, double kappa, double m0);

  const ScalarField& field() const noexcept { return field_; }
  const Grid& grid() const noexcept { return field_.grid(); }
  std::span<const double> values() const noexcept { return field_.values(); }
  double operator[](std::size_t k) const noexcept { return field_[k]; }
  double kappa() const noexcept { return kappa_; }
  double m0() const noexcept { return m0_; }

  bool operator==(const ResourceField&) const = default;

 private:
  ScalarField field_;
  double kappa_;
  double m0_;
};

}  // namespace kppfrag
