#include "kppfrag/field_ops.hpp"

#include <cmath>
#include <sstream>

#include "kppfrag/errors.hpp"

namespace kppfrag {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
}

// Index on [0, n-1] of the even 2(n-1)-periodic extension.
std::size_t fold(std::size_t j, std::size_t n) {
  const std::size_t period = 2 * (n - 1);
  j %= period;
  return j <= n - 1 ? j : period - j;
}

}  // namespace

double mean(const ScalarField& field) {
  const Grid& g = field.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) s += g.weight(k) * field[k];
  return s;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  const Grid& g = a.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += g.weight(k) * std::abs(a[k] - b[k]);
  return s;
}

double bv_seminorm(const ScalarField& field) {
  const Grid& g = field.grid();
  const auto v = field.values();
  double tv = 0.0;
  if (g.dim() == 1) {
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) tv += std::abs(v[i + 1] - v[i]);
    return tv;
  }
  double horizontal = 0.0;
  double vertical = 0.0;
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const std::size_t k = g.index(ix, iy);
      if (ix + 1 < g.nx()) horizontal += std::abs(v[k + 1] - v[k]);
      if (iy + 1 < g.ny()) vertical += std::abs(v[k + g.nx()] - v[k]);
    }
  }
  tv = g.hy() * horizontal + g.hx() * vertical;
  return tv;
}

double bv_norm(const ScalarField& field) {
  const Grid& g = field.grid();
  double l1 = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) l1 += g.weight(k) * std::abs(field[k]);
  return l1 + bv_seminorm(field);
}

int jump_count(const ScalarField& field, double threshold) {
  if (field.grid().dim() != 1) {
    throw InvalidArgument("jump_count is defined for 1D fields only; use bv_seminorm in 2D");
  }
  int jumps = 0;
  bool high = field[0] > threshold;
  for (std::size_t i = 1; i < field.size(); ++i) {
    const bool h = field[i] > threshold;
    if (h != high) ++jumps;
    high = h;
  }
  return jumps;
}

double near_bangbang_fraction(const ScalarField& field, double kappa) {
  std::size_t inside = 0;
  for (double v : field.values()) {
    if (v > 0.05 * kappa && v < 0.95 * kappa) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(field.size());
}

ScalarField periodise(const ScalarField& field, int k) {
  if (k < 0) throw InvalidArgument("periodisation level must be non-negative");
  if (k == 0) return field;
  const Grid& g = field.grid();
  const std::size_t scale = std::size_t{1} << k;
  auto check_axis = [&](std::size_t n, const char* axis) {
    if ((n - 1) % scale != 0) {
      std::ostringstream os;
      os << "periodise level " << k << " needs (N-1) divisible by " << scale << " on axis "
         << axis << "; N=" << n << " does not qualify, use N = " << scale << "*q + 1 (e.g. "
         << scale * ((n - 1) / scale + 1) + 1 << ")";
      throw DivisibilityError(os.str());
    }
  };
  check_axis(g.nx(), "x");
  if (g.dim() == 2) check_axis(g.ny(), "y");

  std::vector<double> out(g.size());
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    const std::size_t sy = g.dim() == 2 ? fold(scale * iy, g.ny()) : 0;
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const std::size_t sx = fold(scale * ix, g.nx());
      out[g.index(ix, iy)] = field[g.index(sx, sy)];
    }
  }
  return ScalarField(g, std::move(out));
}

ScalarField periodise_refined(const ScalarField& field, int k) {
  if (k < 0) throw InvalidArgument("periodisation level must be non-negative");
  if (k == 0) return field;
  const Grid& g = field.grid();
  const Grid fine = g.refined(std::size_t{1} << k);
  std::vector<double> out(fine.size());
  for (std::size_t iy = 0; iy < fine.ny(); ++iy) {
    const std::size_t sy = g.dim() == 2 ? fold(iy, g.ny()) : 0;
    for (std::size_t ix = 0; ix < fine.nx(); ++ix) {
      out[fine.index(ix, iy)] = field[g.index(fold(ix, g.nx()), sy)];
    }
  }
  return ScalarField(fine, std::move(out));
}

ScalarField sample(const Grid& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double y = grid.dim() == 2 ? grid.y(iy) : 0.0;
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) v[grid.index(ix, iy)] = fn(grid.x(ix), y);
  }
  return ScalarField(grid, std::move(v));
}

ScalarField crenel(const Grid& grid, double kappa, double m0) {
  if (grid.dim() != 1) throw InvalidArgument("crenel is a 1D construction");
  if (!(kappa > 0.0 && m0 > 0.0 && m0 < kappa)) {
    throw InvalidArgument("crenel requires 0 < m0 < kappa");
  }
  const double target = m0 / kappa;
  std::vector<double> v(grid.size(), 0.0);
  double filled = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid.weight(i);
    if (filled + w <= target) {
      v[i] = kappa;
      filled += w;
    } else {
      v[i] = kappa * (target - filled) / w;
      break;
    }
  }
  return ScalarField(grid, std::move(v));
}

}  // namespace kppfrag
