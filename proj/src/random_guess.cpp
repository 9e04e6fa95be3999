#include "kppfrag/random_guess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"

namespace kppfrag {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> fourier_samples(const Grid& grid, Rng& rng) {
  constexpr int kModes = 5;
  const double pi = std::numbers::pi;
  std::vector<double> v(grid.size());
  const double a0 = rng.uniform(-0.5, 0.5);
  if (grid.dim() == 1) {
    double a[kModes], b[kModes];
    for (int j = 0; j < kModes; ++j) {
      a[j] = rng.uniform(-0.5, 0.5);
      b[j] = rng.uniform(-0.5, 0.5);
    }
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      double s = a0;
      for (int j = 0; j < kModes; ++j) {
        const double arg = (j + 1) * pi * x;
        s += a[j] * std::sin(arg) + b[j] * std::cos(arg);
      }
      v[i] = s;
    }
    return v;
  }
  double ss[kModes], sc[kModes], cs[kModes], cc[kModes];
  for (int j = 0; j < kModes; ++j) {
    ss[j] = rng.uniform(-0.5, 0.5);
    sc[j] = rng.uniform(-0.5, 0.5);
    cs[j] = rng.uniform(-0.5, 0.5);
    cc[j] = rng.uniform(-0.5, 0.5);
  }
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      double s = a0;
      for (int j = 0; j < kModes; ++j) {
        const double ax = (j + 1) * pi * grid.x(ix);
        const double ay = (j + 1) * pi * grid.y(iy);
        const double sx = std::sin(ax), cx = std::cos(ax);
        const double sy = std::sin(ay), cy = std::cos(ay);
        s += ss[j] * sx * sy + sc[j] * sx * cy + cs[j] * cx * sy + cc[j] * cx * cy;
      }
      v[grid.index(ix, iy)] = s;
    }
  }
  return v;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform(double lo, double hi) noexcept {
  const double u = static_cast<double>(engine_() >> 11) * 0x1p-53;
  return lo + (hi - lo) * u;
}

ResourceField random_fourier_guess(const Grid& grid, double kappa, double m0,
                                   std::uint64_t seed, std::uint64_t stream) {
  ProblemParams{1.0, kappa, m0}.validate();
  const std::uint64_t base = substream_seed(seed, stream);
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    Rng rng(substream_seed(base, attempt));
    std::vector<double> v = fourier_samples(grid, rng);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi - *lo <= 1e-14) continue;
    const double avg = mean(ScalarField(grid, v));
    const double a = std::min(std::abs((kappa - m0) / (*hi - avg)), std::abs(m0 / (*lo - avg)));
    const double b = m0 - a * avg;
    for (double& x : v) x = std::clamp(a * x + b, 0.0, kappa);
    return ResourceField(ScalarField(grid, std::move(v)), kappa, m0);
  }
  throw DegenerateSample("random Fourier guess stayed constant after 16 attempts");
}

}  // namespace kppfrag
