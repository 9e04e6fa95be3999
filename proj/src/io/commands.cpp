#include "kppfrag/io/commands.hpp"

#include <algorithm>
#include <cstdio>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"
#include "kppfrag/io/field_csv.hpp"
#include "kppfrag/io/json_io.hpp"
#include "kppfrag/io/svg_plot.hpp"
#include "kppfrag/random_guess.hpp"

namespace kppfrag::io {

namespace {

std::string g10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Manifest solve(const RunConfig& cfg, std::ostream& log) {
  const ResourceField m = build_resource(cfg);
  const ProblemParams params{cfg.mu.front(), m.kappa(), m.m0()};
  const SteadyState s = solve_steady_state(m, params, cfg.solver);
  nlohmann::json diag = steady_state_diagnostics(s);
  diag["params"] = params_to_json(params);
  diag["lou_residual"] = lou_identity_residual(s, m, params);

  ResultWriter w(cfg.out);
  w.write("diagnostics.json", "diagnostics", dump(diag));
  w.write("theta.csv", "field", format_field_csv(s.theta));
  w.write("m.csv", "field", format_field_csv(m.field()));
  if (cfg.plot) w.write("plot.svg", "plot", render_plot_svg(m, s.theta, "mu = " + g10(params.mu)));
  log << "F = " << g10(total_population(s)) << "  (iterations " << s.iterations
      << ", residual " << g10(s.residual_norm) << (s.used_fallback ? ", fallback" : "") << ")\n";
  return w.commit(cfg);
}

Manifest optimize_cmd(const RunConfig& cfg, std::ostream& log) {
  const ProblemParams params{cfg.mu.front(), cfg.kappa, cfg.m0};
  const OptimRun run = optimize(params, cfg.grid(), cfg.optim, cfg.solver);
  ResultWriter w(cfg.out);
  w.write("optim_run.json", "report", dump(optim_run_to_json(run, params, cfg.optim)));
  w.write("best_m.csv", "field", format_field_csv(run.best_m.field()));
  w.write("best_theta.csv", "field", format_field_csv(run.best_theta));
  if (cfg.plot) {
    w.write("plot.svg", "plot", render_plot_svg(run.best_m, run.best_theta,
                                                "mu = " + g10(params.mu)));
  }
  for (const auto& s : run.starts) {
    if (s.termination == Termination::Failed) {
      w.add_error({{"start_index", s.start_index}, {"error", s.error}});
    }
  }
  log << "best F = " << g10(run.best_F) << " from start " << run.start_index << " ("
      << to_string(run.termination) << "), BV = " << g10(bv_seminorm(run.best_m.field())) << "\n";
  return w.commit(cfg);
}

Manifest sweep(const RunConfig& cfg, std::ostream& log) {
  const SweepReport report = fragmentation_sweep(cfg.kappa, cfg.m0, cfg.grid(), cfg.mu, cfg.optim,
                                                 cfg.resolution, cfg.record_timing, cfg.solver);
  std::size_t ok = 0;
  for (const auto& r : report.records) {
    if (r.ok) {
      ++ok;
      log << "mu = " << g10(r.mu) << ": F = " << g10(r.best_F) << ", BV = " << g10(r.bv);
      if (r.jumps) log << ", jumps = " << *r.jumps;
      if (r.under_resolved) log << " (under-resolved)";
      log << "\n";
    } else {
      log << "mu = " << g10(r.mu) << ": failed: " << r.error << "\n";
    }
  }
  Manifest man = persist_results(report, cfg, cfg.out);
  log << "BV trend " << (report.bv_trend_ok ? "increasing" : "NOT increasing") << "\n";
  if (ok == 0 && !report.records.empty()) {
    throw Error("every sweep point failed; see " + (man.dir / "manifest.json").string());
  }
  return man;
}

Manifest periodise_cmd(const RunConfig& cfg, std::ostream& log) {
  const ResourceField m = build_resource(cfg);
  const auto rows = periodisation_check(m, cfg.mu.front(), cfg.k_max, cfg.solver);
  ResultWriter w(cfg.out);
  w.write("periodisation.json", "report", dump(periodisation_to_json(rows)));
  std::string csv = "k,mu,nodes,F,deviation\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%zu,%.17g,%.17g\n", r.k, r.mu, r.nodes, r.F,
                  r.deviation);
    csv += buf;
    log << "k = " << r.k << ": F = " << g10(r.F) << ", deviation " << g10(r.deviation) << "\n";
  }
  w.write("periodisation.csv", "summary", csv);
  return w.commit(cfg);
}

Manifest lemma2_cmd(const RunConfig& cfg, std::ostream& log) {
  const ResourceField m = build_resource(cfg);
  const Lemma2Result r = lemma2_bound_sweep(m, cfg.mu.front(), cfg.k_max, cfg.lemma2_samples,
                                            cfg.solver);
  ResultWriter w(cfg.out);
  w.write("lemma2.json", "report", dump(lemma2_to_json(r)));
  double worst = r.rows.empty() ? 0.0 : r.rows.front().margin;
  for (const auto& row : r.rows) worst = std::min(worst, row.margin);
  log << "eta = " << g10(r.eta) << ", worst margin " << g10(worst) << ", bound "
      << (r.bound_holds ? "holds" : "VIOLATED") << "\n";
  return w.commit(cfg);
}

Manifest efficiency_cmd(const RunConfig& cfg, std::ostream& log) {
  const ResourceField m = build_resource(cfg);
  nlohmann::json rows = nlohmann::json::array();
  const double mean_m = mean(m.field());
  double best = 0.0;
  for (double mu : cfg.mu) {
    const double F = objective(m, mu, cfg.solver);
    rows.push_back({{"mu", mu}, {"F", F}, {"ratio", F / mean_m}});
    best = std::max(best, F / mean_m);
  }
  ResultWriter w(cfg.out);
  w.write("efficiency.json", "report",
          dump({{"mean_m", mean_m}, {"ratio", best}, {"rows", rows}}));
  log << "max F/mean(m) = " << g10(best) << "\n";
  return w.commit(cfg);
}

}  // namespace

ResourceField build_resource(const RunConfig& cfg) {
  const std::string& r = cfg.resource;
  if (r == "crenel") return ResourceField(crenel(cfg.grid(), cfg.kappa, cfg.m0), cfg.kappa, cfg.m0);
  if (r == "constant") return ResourceField(ScalarField(cfg.grid(), cfg.m0), cfg.kappa, cfg.m0);
  if (r == "fourier") return random_fourier_guess(cfg.grid(), cfg.kappa, cfg.m0, cfg.optim.seed);
  try {
    return ResourceField::clamped(read_field_csv(r), cfg.kappa, cfg.m0);
  } catch (const InvalidArgument& e) {
    throw ConfigError("resource: " + r + ": " + e.what());
  }
}

Manifest run_command(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  switch (cfg.command) {
    case Command::Solve: return solve(cfg, log);
    case Command::Optimize: return optimize_cmd(cfg, log);
    case Command::Sweep: return sweep(cfg, log);
    case Command::PeriodiseCheck: return periodise_cmd(cfg, log);
    case Command::Lemma2: return lemma2_cmd(cfg, log);
    case Command::Efficiency: return efficiency_cmd(cfg, log);
  }
  throw ConfigError("command: unsupported");
}

}  // namespace kppfrag::io
