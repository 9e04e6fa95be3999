#pragma once

#include <cstdint>
#include <random>

#include "kppfrag/grid.hpp"

namespace kppfrag {

/// Deterministic stream splitting.
///
/// Substream j of a 64-bit seed s is seeded with splitmix64(s + (j+1)*G),
/// G = 0x9E3779B97F4A7C15, and drives a std::mt19937_64 (whose output
/// sequence is fixed by the C++ standard). Uniform doubles are built from the
/// top 53 bits, so results do not depend on the standard library vendor.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

 private:
  std::mt19937_64 engine_;
};

/// Random admissible initial guess built from the first five Fourier modes.
///
/// 1D: m(x) = a0 + sum_{j=1..5} a_j sin(j pi x) + b_j cos(j pi x) with all 11
/// coefficients uniform on [-0.5, 0.5]. 2D: a0 plus, for each j, four
/// independent coefficients on the separable products sin*sin, sin*cos,
/// cos*sin and cos*cos of (j pi x, j pi y). The samples are then mapped by
/// T(m) = a*m + b with
///   a = min(|(kappa - m0)/(max m - mean m)|, |m0/(min m - mean m)|),
///   b = m0 - a*mean m,
/// which yields mean m0 and range within [0, kappa]. A sample that is
/// constant to 1e-14 is redrawn from the next attempt substream; after 16
/// attempts DegenerateSample is thrown.
ResourceField random_fourier_guess(const Grid& grid, double kappa, double m0,
                                   std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace kppfrag
