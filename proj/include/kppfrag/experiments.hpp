#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kppfrag/grid.hpp"
#include "kppfrag/optimizer.hpp"
#include "kppfrag/steady_state.hpp"

namespace kppfrag {

/// Steady-state objective F(m, mu) = mean(theta_{m,mu}).
double objective(const ResourceField& m, double mu, const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Periodisation

struct PeriodisationRow {
  int k = 0;
  double mu = 0.0;          ///< mu / 4^k
  std::size_t nodes = 0;    ///< nodes per axis of the periodised field
  double F = 0.0;
  double deviation = 0.0;   ///< |F(m_k, mu/4^k) - F(m, mu)|
};

/// F of the k-fold periodised field at diffusivity mu/4^k, for k = 0..k_max.
/// Periodised fields live on the 2^k-refined grid, where the discrete problem
/// is the exact fold of the original one.
std::vector<PeriodisationRow> periodisation_check(const ResourceField& m, double mu, int k_max,
                                                  const SolverConfig& cfg = {});

struct Lemma2Row {
  int k = 0;
  double mu = 0.0;      ///< sampled mu in I_0, before rescaling by 4^-k
  double F = 0.0;       ///< F(m_k, mu/4^k)
  double margin = 0.0;  ///< F - (m0 + eta)
};

struct Lemma2Result {
  double eta = 0.0;
  std::vector<double> sampled_mu;
  std::vector<Lemma2Row> rows;
  /// Every row has margin >= -1e-8.
  bool bound_holds = false;
};

/// eta = min over `samples` log-spaced mu in [underline_mu, 4*underline_mu]
/// of F(m, mu) - m0, then the same lower bound checked on the dyadic family
/// F(m_k, mu/4^k) for k <= k_max.
Lemma2Result lemma2_bound_sweep(const ResourceField& m, double underline_mu, int k_max,
                                int samples = 16, const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Fragmentation sweep

/// Minimum nodes per axis for diffusivity mu: N >= 10/sqrt(mu).
bool satisfies_resolution(const Grid& grid, double mu);

enum class ResolutionPolicy { Enforce, Warn };

struct SweepRecord {
  double mu = 0.0;
  bool ok = false;
  std::string error;
  double best_F = 0.0;
  double bv = 0.0;
  std::optional<int> jumps;  ///< 1D only
  double bangbang_fraction = 0.0;
  std::size_t best_start = 0;
  int starts_failed = 0;
  bool under_resolved = false;
  double seconds = 0.0;
  std::optional<ResourceField> best_m;
  std::optional<ScalarField> best_theta;
};

struct SweepReport {
  double kappa = 0.0;
  double m0 = 0.0;
  Grid grid;
  OptimConfig optim;
  std::vector<SweepRecord> records;
  bool bv_trend_ok = false;
};

/// True when the sequence is strictly increasing except for at most one
/// non-increase whose relative drop is <= tolerance.
bool bv_trend_ok(std::span<const double> bv, double tolerance = 0.05);

/// Runs optimize() for each mu (strictly decreasing) and records the
/// fragmentation metrics of the best field. Per-mu failures are recorded and
/// the sweep continues. Under ResolutionPolicy::Enforce a mu violating
/// satisfies_resolution() raises InvalidArgument before any compute; under
/// Warn it is flagged in the record.
SweepReport fragmentation_sweep(double kappa, double m0, const Grid& grid,
                                const std::vector<double>& mu_list, const OptimConfig& cfg,
                                ResolutionPolicy policy = ResolutionPolicy::Enforce,
                                bool record_timing = true, const SolverConfig& solver_cfg = {});

/// max over mu_list of F(m, mu)/mean(m); a lower bound for sup_mu.
double efficiency_ratio(const ResourceField& m, std::span<const double> mu_list,
                        const SolverConfig& cfg = {});

}  // namespace kppfrag
