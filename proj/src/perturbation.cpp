#include "kppfrag/perturbation.hpp"

#include <algorithm>
#include <numeric>

#include "kppfrag/errors.hpp"

namespace kppfrag {

Perturbation best_perturbation(std::span<const double> g, std::span<const double> m,
                               double kappa, std::span<const double> weights) {
  const std::size_t n = g.size();
  if (m.size() != n || (!weights.empty() && weights.size() != n)) {
    throw InvalidArgument("best_perturbation: size mismatch");
  }
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w(i) > 0.0)) throw InvalidArgument("best_perturbation: weights must be positive");
  }

  std::vector<double> ratio(n);
  for (std::size_t i = 0; i < n; ++i) ratio[i] = g[i] / w(i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ratio[a] > ratio[b]; });

  double total_lower = 0.0;
  for (std::size_t i = 0; i < n; ++i) total_lower += w(i) * m[i];

  Perturbation out;
  out.xi.assign(n, 0.0);

  // Sweep the tie groups in decreasing ratio. `net` is the weighted amount the
  // current group must add so that the budget balances; it decreases
  // monotonically along the sweep.
  double above_up = 0.0;
  double consumed_lower = 0.0;
  std::size_t start = 0;
  bool placed = false;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && ratio[order[end]] == ratio[order[start]]) ++end;
    double cap_hi = 0.0, cap_lo = 0.0;
    for (std::size_t s = start; s < end; ++s) {
      const std::size_t i = order[s];
      cap_hi += w(i) * (kappa - m[i]);
      cap_lo += w(i) * m[i];
    }
    const double below_low = total_lower - consumed_lower - cap_lo;
    double net = below_low - above_up;

    if (!placed && (net <= cap_hi || end == n)) {
      net = std::clamp(net, -cap_lo, cap_hi);
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t i = order[s];
        if (net > 0.0) {
          const double room = w(i) * (kappa - m[i]);
          const double take = std::min(room, net);
          out.xi[i] = take / w(i);
          net -= take;
        } else if (net < 0.0) {
          const double room = w(i) * m[i];
          const double take = std::min(room, -net);
          out.xi[i] = -take / w(i);
          net += take;
        }
      }
      placed = true;
    } else {
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t i = order[s];
        out.xi[i] = placed ? -m[i] : kappa - m[i];
      }
    }
    above_up += cap_hi;
    consumed_lower += cap_lo;
    start = end;
  }

  for (std::size_t i = 0; i < n; ++i) out.value += g[i] * out.xi[i];
  return out;
}

FieldPerturbation best_perturbation(const ScalarField& g, const ResourceField& m) {
  const Grid& grid = m.grid();
  if (!(g.grid() == grid)) throw InvalidArgument("gradient and resource on different grids");
  std::vector<double> w(grid.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = grid.weight(k);
  Perturbation p = best_perturbation(g.values(), m.values(), m.kappa(), w);
  return FieldPerturbation{ScalarField(grid, std::move(p.xi)), p.value};
}

}  // namespace kppfrag
