#include "kppfrag/io/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kppfrag/errors.hpp"
#include "kppfrag/io/json_io.hpp"

namespace kppfrag::io {

namespace {

struct Preset {
  const char* name;
  std::size_t nx, ny;
  double m0;
  std::vector<double> mu;
  ResolutionPolicy resolution;
};

const std::vector<Preset>& presets() {
  // 60x60 cannot meet the 10/sqrt(mu) rule at mu = 0.01, so the 2D presets warn.
  static const std::vector<Preset> all = {
      {"paper-1d-m03", 1000, 0, 0.3, {1.0, 0.1, 0.01, 0.001}, ResolutionPolicy::Enforce},
      {"paper-1d-m06", 1000, 0, 0.6, {1.0, 0.1, 0.01, 0.001}, ResolutionPolicy::Enforce},
      {"paper-2d-m03", 60, 60, 0.3, {0.1, 0.01}, ResolutionPolicy::Warn},
      {"paper-2d-m06", 60, 60, 0.6, {0.1, 0.01}, ResolutionPolicy::Warn},
  };
  return all;
}

bool takes_mu_list(Command c) { return c == Command::Sweep || c == Command::Efficiency; }

void apply_preset(RunConfig& cfg, const std::string& name) {
  for (const auto& p : presets()) {
    if (name != p.name) continue;
    cfg.preset = name;
    cfg.kappa = 1.0;
    cfg.m0 = p.m0;
    cfg.nx = p.nx;
    cfg.ny = p.ny;
    cfg.resolution = p.resolution;
    if (takes_mu_list(cfg.command)) cfg.mu = p.mu;
    return;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset: unknown preset '" + name + "' (known: " + known + ")");
}

double get_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

std::string get_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key + ": expected true or false");
  return v.get<bool>();
}

int get_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
  return v.get<int>();
}

std::vector<double> get_mu(const nlohmann::json& v) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError("mu: expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_number(e, "mu"));
  return out;
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  for (const auto& [key, v] : j.items()) {
    if (key == "command" || key == "preset") {
      continue;  // handled first
    } else if (key == "grid") {
      parse_grid_spec(get_string(v, key), cfg.nx, cfg.ny);
    } else if (key == "mu") {
      cfg.mu = get_mu(v);
    } else if (key == "kappa") {
      cfg.kappa = get_number(v, key);
    } else if (key == "m0") {
      cfg.m0 = get_number(v, key);
    } else if (key == "resource") {
      cfg.resource = get_string(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
      cfg.optim.seed = v.get<std::uint64_t>();
    } else if (key == "optimizer") {
      cfg.optim = optim_config_from_json(v, cfg.optim);
    } else if (key == "solver") {
      cfg.solver = solver_config_from_json(v, cfg.solver);
    } else if (key == "resolution") {
      const std::string r = get_string(v, key);
      if (r == "enforce") {
        cfg.resolution = ResolutionPolicy::Enforce;
      } else if (r == "warn") {
        cfg.resolution = ResolutionPolicy::Warn;
      } else {
        throw ConfigError("resolution: expected 'enforce' or 'warn'");
      }
    } else if (key == "k_max") {
      cfg.k_max = get_int(v, key);
    } else if (key == "lemma2_samples") {
      cfg.lemma2_samples = get_int(v, key);
    } else if (key == "out") {
      cfg.out = get_string(v, key);
    } else if (key == "plot") {
      cfg.plot = get_bool(v, key);
    } else if (key == "record_timing") {
      cfg.record_timing = get_bool(v, key);
    } else {
      throw ConfigError(key + ": unknown key");
    }
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Optimize: return "optimize";
    case Command::Sweep: return "sweep";
    case Command::PeriodiseCheck: return "periodise-check";
    case Command::Lemma2: return "lemma2";
    case Command::Efficiency: return "efficiency";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Solve, Command::Optimize, Command::Sweep, Command::PeriodiseCheck,
                    Command::Lemma2, Command::Efficiency}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("command: unknown command '" + name +
                    "' (expected solve, optimize, sweep, periodise-check, lemma2 or efficiency)");
}

Grid RunConfig::grid() const { return ny == 0 ? Grid::line(nx) : Grid::square(nx, ny); }

bool operator==(const RunConfig& a, const RunConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : presets()) out.emplace_back(p.name);
  return out;
}

void parse_grid_spec(const std::string& spec, std::size_t& nx, std::size_t& ny) {
  auto parse = [&](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("grid: expected N or NxM, got '" + spec + "'");
    }
    return v;
  };
  const std::size_t x = spec.find('x');
  if (x == std::string::npos) {
    nx = parse(spec);
    ny = 0;
  } else {
    nx = parse(std::string_view(spec).substr(0, x));
    ny = parse(std::string_view(spec).substr(x + 1));
    if (ny == 0) throw ConfigError("grid: second axis must have at least 3 nodes");
  }
}

std::string grid_spec(const RunConfig& cfg) {
  return cfg.ny == 0 ? std::to_string(cfg.nx)
                     : std::to_string(cfg.nx) + "x" + std::to_string(cfg.ny);
}

RunConfig parse_config(const nlohmann::json& file, const ConfigOverrides& flags) {
  if (!file.is_null() && !file.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig cfg;
  const bool has_file = file.is_object();
  if (flags.command) {
    cfg.command = parse_command(*flags.command);
  } else if (has_file && file.contains("command")) {
    cfg.command = parse_command(get_string(file["command"], "command"));
  }
  if (flags.preset) {
    apply_preset(cfg, *flags.preset);
  } else if (has_file && file.contains("preset")) {
    const std::string name = get_string(file["preset"], "preset");
    if (!name.empty()) apply_preset(cfg, name);
  }
  if (has_file) apply_json(cfg, file);

  if (flags.mu) cfg.mu = *flags.mu;
  if (flags.m0) cfg.m0 = *flags.m0;
  if (flags.kappa) cfg.kappa = *flags.kappa;
  if (flags.grid) parse_grid_spec(*flags.grid, cfg.nx, cfg.ny);
  if (flags.seed) cfg.optim.seed = *flags.seed;
  if (flags.out) cfg.out = *flags.out;
  if (flags.plot) cfg.plot = true;

  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::optional<std::string>& path, const ConfigOverrides& flags) {
  nlohmann::json file;
  if (path) {
    std::ifstream is(*path);
    if (!is) throw ConfigError("config: cannot read '" + *path + "'");
    try {
      file = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config: malformed JSON in '" + *path + "': " + e.what());
    }
  }
  return parse_config(file, flags);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json opt = optim_config_to_json(cfg.optim);
  opt.erase("seed");
  nlohmann::json mu = nlohmann::json::array();
  for (double v : cfg.mu) mu.push_back(v);
  return {{"command", to_string(cfg.command)},
          {"preset", cfg.preset},
          {"grid", grid_spec(cfg)},
          {"mu", mu},
          {"kappa", cfg.kappa},
          {"m0", cfg.m0},
          {"resource", cfg.resource},
          {"seed", cfg.optim.seed},
          {"optimizer", opt},
          {"solver", solver_config_to_json(cfg.solver)},
          {"resolution", cfg.resolution == ResolutionPolicy::Enforce ? "enforce" : "warn"},
          {"k_max", cfg.k_max},
          {"lemma2_samples", cfg.lemma2_samples},
          {"out", cfg.out},
          {"plot", cfg.plot},
          {"record_timing", cfg.record_timing}};
}

void validate(const RunConfig& cfg) {
  if (cfg.nx < 3) throw ConfigError("grid: need at least 3 nodes per axis");
  if (cfg.ny != 0 && cfg.ny < 3) throw ConfigError("grid: need at least 3 nodes per axis");
  if (!(std::isfinite(cfg.kappa) && cfg.kappa > 0.0)) {
    throw ConfigError("kappa: must be a positive number, got " + fmt(cfg.kappa));
  }
  if (!(std::isfinite(cfg.m0) && cfg.m0 > 0.0 && cfg.m0 < cfg.kappa)) {
    throw ConfigError("m0: must satisfy 0 < m0 < kappa for a resource with 0 <= m <= kappa "
                      "and mean m0 (got m0=" + fmt(cfg.m0) + ", kappa=" + fmt(cfg.kappa) + ")");
  }

  if (cfg.mu.empty()) throw ConfigError("mu: required for " + to_string(cfg.command));
  if (!takes_mu_list(cfg.command) && cfg.mu.size() != 1) {
    throw ConfigError("mu: " + to_string(cfg.command) + " takes a single value");
  }
  for (std::size_t i = 0; i < cfg.mu.size(); ++i) {
    if (!(std::isfinite(cfg.mu[i]) && cfg.mu[i] > 0.0)) {
      throw ConfigError("mu: values must be positive, got " + fmt(cfg.mu[i]));
    }
    if (cfg.command == Command::Sweep && i > 0 && !(cfg.mu[i] < cfg.mu[i - 1])) {
      throw ConfigError("mu: sweep values must be strictly decreasing");
    }
  }

  try {
    cfg.optim.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
  try {
    cfg.solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (cfg.k_max < 0 || cfg.k_max > 12) throw ConfigError("k_max: must lie in [0, 12]");
  if (cfg.lemma2_samples < 2) throw ConfigError("lemma2_samples: must be at least 2");
  if (cfg.out.empty()) throw ConfigError("out: must not be empty");
  if (cfg.resource.empty()) throw ConfigError("resource: must not be empty");
  const bool optimizes = cfg.command == Command::Optimize || cfg.command == Command::Sweep;
  if (!optimizes && cfg.resource == "crenel" && cfg.dim() != 1) {
    throw ConfigError("resource: crenel is defined on 1D grids only");
  }
  if (optimizes && cfg.resolution == ResolutionPolicy::Enforce) {
    const Grid g = cfg.grid();
    for (double mu : cfg.mu) {
      if (!satisfies_resolution(g, mu)) {
        std::ostringstream os;
        os << "grid: mu=" << mu << " needs at least " << std::ceil(10.0 / std::sqrt(mu))
           << " nodes per axis (set \"resolution\": \"warn\" to run anyway)";
        throw ConfigError(os.str());
      }
    }
  }
}

}  // namespace kppfrag::io
