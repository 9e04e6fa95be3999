// kppfrag command-line driver.
//
//   kppfrag <command> [--config FILE] [--mu ...] [--m0 ...] [--kappa ...]
//           [--grid N[xM]] [--seed S] [--out DIR] [--preset NAME] [--plot]
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 IO failure.

#include <iostream>

#include <CLI11.hpp>

#include "kppfrag/errors.hpp"
#include "kppfrag/io/commands.hpp"
#include "kppfrag/io/config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kIoError = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total-population maximisation for the steady logistic diffusion equation"};
  app.set_version_flag("--version", "kppfrag 0.1.0");

  std::string command;
  std::string config_path;
  kppfrag::io::ConfigOverrides flags;
  std::vector<double> mu;
  double m0 = 0.0, kappa = 0.0;
  std::string grid, out, preset;
  std::uint64_t seed = 0;

  app.add_option("command", command,
                 "solve | optimize | sweep | periodise-check | lemma2 | efficiency")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* mu_opt = app.add_option("--mu", mu, "diffusivity, or a list for sweep/efficiency")
                     ->delimiter(',');
  auto* m0_opt = app.add_option("--m0", m0, "mean resource");
  auto* kappa_opt = app.add_option("--kappa", kappa, "resource upper bound");
  auto* grid_opt = app.add_option("--grid", grid, "nodes per axis: N or NxM");
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed for the random starts");
  auto* out_opt = app.add_option("--out", out, "output directory");
  std::string preset_help = "parameter preset:";
  for (const auto& n : kppfrag::io::preset_names()) preset_help += " " + n;
  auto* preset_opt = app.add_option("--preset", preset, preset_help);
  app.add_flag("--plot", flags.plot, "write SVG figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  flags.command = command;
  if (mu_opt->count()) flags.mu = mu;
  if (m0_opt->count()) flags.m0 = m0;
  if (kappa_opt->count()) flags.kappa = kappa;
  if (grid_opt->count()) flags.grid = grid;
  if (seed_opt->count()) flags.seed = seed;
  if (out_opt->count()) flags.out = out;
  if (preset_opt->count()) flags.preset = preset;

  try {
    const auto cfg = kppfrag::io::parse_config(
        config_path.empty() ? std::nullopt : std::optional<std::string>(config_path), flags);
    const auto manifest = kppfrag::io::run_command(cfg, std::cout);
    std::cout << "wrote " << manifest.files.size() << " files + manifest.json to "
              << manifest.dir.string() << "\n";
    return kOk;
  } catch (const kppfrag::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const kppfrag::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const kppfrag::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  }
}
