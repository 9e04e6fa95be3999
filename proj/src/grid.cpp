#include "kppfrag/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"

namespace kppfrag {

namespace {

double axis_weight(std::size_t i, std::size_t n) {
  return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
}

}  // namespace

Grid::Grid(int dim, std::size_t nx, std::size_t ny) : dim_(dim), nx_(nx), ny_(ny) {
  if (nx_ < 3 || (dim_ == 2 && ny_ < 3)) {
    std::ostringstream os;
    os << "grid needs at least 3 nodes per axis, got " << nx_;
    if (dim_ == 2) os << "x" << ny_;
    throw InvalidArgument(os.str());
  }
}

Grid Grid::line(std::size_t nx) { return Grid(1, nx, 1); }

Grid Grid::square(std::size_t nx, std::size_t ny) { return Grid(2, nx, ny); }

double Grid::node_weight(std::size_t k) const noexcept {
  const std::size_t ix = k % nx_;
  double w = axis_weight(ix, nx_);
  if (dim_ == 2) w *= axis_weight(k / nx_, ny_);
  return w;
}

double Grid::weight(std::size_t k) const noexcept {
  double total = static_cast<double>(nx_ - 1);
  if (dim_ == 2) total *= static_cast<double>(ny_ - 1);
  return node_weight(k) / total;
}

Grid Grid::refined(std::size_t factor) const {
  if (factor == 0) throw InvalidArgument("refinement factor must be positive");
  const std::size_t nx = factor * (nx_ - 1) + 1;
  if (dim_ == 1) return line(nx);
  return square(nx, factor * (ny_ - 1) + 1);
}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    std::ostringstream os;
    os << "field has " << values_.size() << " values but the grid has " << grid_.size()
       << " nodes";
    throw InvalidArgument(os.str());
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream os;
      os << "non-finite field value at node " << k;
      throw InvalidArgument(os.str());
    }
  }
}

ScalarField::ScalarField(Grid grid, double constant)
    : ScalarField(grid, std::vector<double>(grid.size(), constant)) {}

void ProblemParams::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidArgument("diffusivity mu must be positive and finite");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("kappa must be positive and finite");
  }
  if (!(m0 > 0.0 && m0 < kappa)) {
    std::ostringstream os;
    os << "admissible class requires 0 < m0 < kappa, got m0=" << m0 << " kappa=" << kappa;
    throw InvalidArgument(os.str());
  }
}

ResourceField::ResourceField(ScalarField field, double kappa, double m0)
    : field_(std::move(field)), kappa_(kappa), m0_(m0) {
  if (!(kappa_ > 0.0)) throw InvalidArgument("kappa must be positive");
  for (std::size_t k = 0; k < field_.size(); ++k) {
    const double v = field_[k];
    if (v < -kBoundTol || v > kappa_ + kBoundTol) {
      std::ostringstream os;
      os << "resource value " << v << " at node " << k << " outside [0, " << kappa_ << "]";
      throw InvalidArgument(os.str());
    }
  }
  const double avg = mean(field_);
  if (std::abs(avg - m0_) > kMeanTol) {
    std::ostringstream os;
    os.precision(17);
    os << "resource mean " << avg << " differs from m0=" << m0_;
    throw InvalidArgument(os.str());
  }
}

ResourceField ResourceField::clamped(ScalarField field, double kappa, double m0) {
  std::vector<double> v = field.data();
  for (double& x : v) {
    if (x < 0.0 && x >= -kBoundTol) x = 0.0;
    if (x > kappa && x <= kappa + kBoundTol) x = kappa;
  }
  return ResourceField(ScalarField(field.grid(), std::move(v)), kappa, m0);
}

}  // namespace kppfrag
