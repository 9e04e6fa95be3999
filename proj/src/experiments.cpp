#include "kppfrag/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"

namespace kppfrag {

namespace {

ResourceField periodised_resource(const ResourceField& m, int k) {
  return ResourceField::clamped(periodise_refined(m.field(), k), m.kappa(), m.m0());
}

}  // namespace

double objective(const ResourceField& m, double mu, const SolverConfig& cfg) {
  return total_population(solve_steady_state(m, {mu, m.kappa(), m.m0()}, cfg));
}

std::vector<PeriodisationRow> periodisation_check(const ResourceField& m, double mu, int k_max,
                                                  const SolverConfig& cfg) {
  if (k_max < 0) throw InvalidArgument("k_max must be non-negative");
  const double base = objective(m, mu, cfg);
  std::vector<PeriodisationRow> rows;
  for (int k = 0; k <= k_max; ++k) {
    const ResourceField mk = periodised_resource(m, k);
    const double muk = mu / std::pow(4.0, k);
    const double Fk = k == 0 ? base : objective(mk, muk, cfg);
    rows.push_back({k, muk, mk.grid().nx(), Fk, std::abs(Fk - base)});
  }
  return rows;
}

Lemma2Result lemma2_bound_sweep(const ResourceField& m, double underline_mu, int k_max,
                                int samples, const SolverConfig& cfg) {
  if (!(underline_mu > 0.0)) throw InvalidArgument("underline_mu must be positive");
  if (samples < 2) throw InvalidArgument("lemma2 sweep needs at least two samples");
  if (k_max < 0) throw InvalidArgument("k_max must be non-negative");
  Lemma2Result out;
  for (int s = 0; s < samples; ++s) {
    const double frac = static_cast<double>(s) / static_cast<double>(samples - 1);
    out.sampled_mu.push_back(underline_mu * std::pow(4.0, frac));
  }
  std::vector<double> base;
  for (double mu : out.sampled_mu) base.push_back(objective(m, mu, cfg));
  out.eta = *std::min_element(base.begin(), base.end()) - m.m0();

  out.bound_holds = true;
  for (int k = 0; k <= k_max; ++k) {
    const ResourceField mk = periodised_resource(m, k);
    for (std::size_t s = 0; s < out.sampled_mu.size(); ++s) {
      const double mu = out.sampled_mu[s];
      const double F = k == 0 ? base[s] : objective(mk, mu / std::pow(4.0, k), cfg);
      const double margin = F - (m.m0() + out.eta);
      out.rows.push_back({k, mu, F, margin});
      if (margin < -1e-8) out.bound_holds = false;
    }
  }
  return out;
}

bool satisfies_resolution(const Grid& grid, double mu) {
  const double needed = 10.0 / std::sqrt(mu);
  std::size_t n = grid.nx();
  if (grid.dim() == 2) n = std::min(n, grid.ny());
  return static_cast<double>(n) >= needed;
}

bool bv_trend_ok(std::span<const double> bv, double tolerance) {
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < bv.size(); ++i) {
    if (bv[i + 1] > bv[i]) continue;
    ++inversions;
    const double drop = bv[i] > 0.0 ? (bv[i] - bv[i + 1]) / bv[i] : 0.0;
    if (drop > tolerance) return false;
  }
  return inversions <= 1;
}

SweepReport fragmentation_sweep(double kappa, double m0, const Grid& grid,
                                const std::vector<double>& mu_list, const OptimConfig& cfg,
                                ResolutionPolicy policy, bool record_timing,
                                const SolverConfig& solver_cfg) {
  ProblemParams{1.0, kappa, m0}.validate();
  cfg.validate();
  for (std::size_t i = 0; i < mu_list.size(); ++i) {
    if (!(mu_list[i] > 0.0)) throw InvalidArgument("sweep diffusivities must be positive");
    if (i > 0 && !(mu_list[i] < mu_list[i - 1])) {
      throw InvalidArgument("sweep diffusivities must be strictly decreasing");
    }
    if (policy == ResolutionPolicy::Enforce && !satisfies_resolution(grid, mu_list[i])) {
      std::ostringstream os;
      os << "mu=" << mu_list[i] << " needs at least " << std::ceil(10.0 / std::sqrt(mu_list[i]))
         << " nodes per axis";
      throw InvalidArgument(os.str());
    }
  }

  SweepReport report{kappa, m0, grid, cfg, {}, false};
  for (double mu : mu_list) {
    SweepRecord rec;
    rec.mu = mu;
    rec.under_resolved = !satisfies_resolution(grid, mu);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      OptimRun run = optimize({mu, kappa, m0}, grid, cfg, solver_cfg);
      rec.ok = true;
      rec.best_F = run.best_F;
      rec.bv = bv_seminorm(run.best_m.field());
      if (grid.dim() == 1) rec.jumps = jump_count(run.best_m.field(), 0.5 * kappa);
      rec.bangbang_fraction = near_bangbang_fraction(run.best_m.field(), kappa);
      rec.best_start = run.start_index;
      for (const auto& s : run.starts) {
        if (s.termination == Termination::Failed) ++rec.starts_failed;
      }
      rec.best_m = std::move(run.best_m);
      rec.best_theta = std::move(run.best_theta);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    if (record_timing) {
      rec.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    report.records.push_back(std::move(rec));
  }

  std::vector<double> bv;
  for (const auto& r : report.records) {
    if (r.ok) bv.push_back(r.bv);
  }
  report.bv_trend_ok = bv.size() == report.records.size() && bv_trend_ok(bv);
  return report;
}

double efficiency_ratio(const ResourceField& m, std::span<const double> mu_list,
                        const SolverConfig& cfg) {
  const double m_mean = mean(m.field());
  if (!(m_mean > 0.0)) throw NonPositiveMeanResource("efficiency ratio needs mean(m) > 0");
  double best = 0.0;
  for (double mu : mu_list) best = std::max(best, objective(m, mu, cfg) / m_mean);
  return best;
}

}  // namespace kppfrag
