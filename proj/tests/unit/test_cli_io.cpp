#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kppfrag/errors.hpp"
#include "kppfrag/field_ops.hpp"
#include "kppfrag/io/commands.hpp"
#include "kppfrag/io/config.hpp"
#include "kppfrag/io/field_csv.hpp"
#include "kppfrag/io/json_io.hpp"
#include "kppfrag/io/results.hpp"
#include "kppfrag/io/svg_plot.hpp"
#include "kppfrag/random_guess.hpp"
#include "kppfrag/steady_state.hpp"

using namespace kppfrag;
using namespace kppfrag::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("kppfrag-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

boost::property_tree::ptree parse_xml(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(is, tree);
  return tree;
}

int count_substr(const std::string& s, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

int run_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " " + KPPFRAG_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

SweepReport small_sweep(bool timing = false) {
  OptimConfig cfg;
  cfg.starts = 2;
  cfg.seed = 3;
  cfg.max_outer_iters = 40;
  return fragmentation_sweep(1.0, 0.3, Grid::line(120), {0.5, 0.1}, cfg,
                             ResolutionPolicy::Enforce, timing);
}

RunConfig sweep_config(const fs::path& out) {
  ConfigOverrides f;
  f.command = "sweep";
  f.mu = std::vector<double>{0.5, 0.1};
  f.grid = "120";
  f.out = out.string();
  f.plot = true;
  return parse_config(nlohmann::json{{"optimizer", {{"starts", 2}}}, {"record_timing", false}}, f);
}

}  // namespace

TEST_CASE("field CSV round trip") {
  Rng rng(1);
  for (const Grid& g : {Grid::line(17), Grid::square(5, 7)}) {
    std::vector<double> v(g.size());
    for (double& x : v) x = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-30.0, 30.0));
    v[0] = 0.1;
    v[1] = 1.0 / 3.0;
    const ScalarField f(g, v);
    const std::string text = format_field_csv(f);
    CHECK(text.rfind(g.dim() == 1 ? "x,value\n" : "x,y,value\n", 0) == 0);
    CHECK(count_substr(text, "\n") == static_cast<int>(g.size()) + 1);
    const ScalarField back = parse_field_csv(text);
    CHECK(back == f);
    CHECK(format_field_csv(back) == text);
  }

  TempDir tmp;
  const ResourceField m = random_fourier_guess(Grid::square(9, 9), 1.0, 0.3, 2);
  write_field_csv(m.field(), tmp.path / "m.csv");
  CHECK(read_field_csv(tmp.path / "m.csv") == m.field());

  CHECK_THROWS_AS(read_field_csv(tmp.path / "missing.csv"), IoError);
  CHECK_THROWS_AS(parse_field_csv(""), InvalidArgument);
  CHECK_THROWS_AS(parse_field_csv("t,value\n0,1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_field_csv("x,value\n0,1\n0.5,abc\n1,1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_field_csv("x,value\n0,1\n0.4,1\n1,1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_field_csv("x,value\n0,1,2\n"), InvalidArgument);
}

TEST_CASE("config presets") {
  ConfigOverrides f;
  f.command = "sweep";
  f.preset = "paper-1d-m03";
  const RunConfig a = parse_config(nlohmann::json(), f);
  CHECK(a.kappa == 1.0);
  CHECK(a.m0 == 0.3);
  CHECK(a.nx == 1000);
  CHECK(a.dim() == 1);
  CHECK(a.mu == std::vector<double>{1.0, 0.1, 0.01, 0.001});

  f.preset = "paper-2d-m06";
  const RunConfig b = parse_config(nlohmann::json(), f);
  CHECK(b.kappa == 1.0);
  CHECK(b.m0 == 0.6);
  CHECK(b.nx == 60);
  CHECK(b.ny == 60);
  CHECK(b.dim() == 2);
  CHECK(b.resolution == ResolutionPolicy::Warn);
  CHECK(b.mu == std::vector<double>{0.1, 0.01});

  f.preset = "paper-3d";
  CHECK_THROWS_AS(parse_config(nlohmann::json(), f), ConfigError);
  CHECK(preset_names().size() == 4);
}

TEST_CASE("config validation messages name the field") {
  auto message = [](const nlohmann::json& j, ConfigOverrides f = {}) -> std::string {
    try {
      (void)parse_config(j, f);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  const nlohmann::json base = {{"command", "solve"}, {"mu", 0.01}};
  CHECK(message(base).empty());

  nlohmann::json j = base;
  j["m0"] = 1.5;
  const std::string m0 = message(j);
  CHECK(m0.rfind("m0:", 0) == 0);
  CHECK(m0.find("0 < m0 < kappa") != std::string::npos);

  j = base;
  j["colour"] = "blue";
  CHECK(message(j).rfind("colour: unknown key", 0) == 0);
  j = base;
  j["optimizer"] = {{"starts", 0}};
  CHECK(message(j).rfind("optimizer:", 0) == 0);
  j = base;
  j["optimizer"] = {{"sarts", 3}};
  CHECK(message(j).rfind("optimizer.sarts: unknown key", 0) == 0);
  j = base;
  j["solver"] = {{"newton_tol", "tiny"}};
  CHECK(message(j).rfind("solver.newton_tol:", 0) == 0);
  j = base;
  j["mu"] = {0.1, 0.01};
  CHECK(message(j).rfind("mu:", 0) == 0);
  j = base;
  j["mu"] = -1.0;
  CHECK(message(j).rfind("mu:", 0) == 0);
  j = {{"command", "sweep"}, {"mu", {0.01, 0.1}}};
  CHECK(message(j).find("strictly decreasing") != std::string::npos);
  j = {{"command", "sweep"}, {"mu", {0.1, 0.001}}, {"grid", "300"}};
  CHECK(message(j).rfind("grid:", 0) == 0);
  j = {{"command", "sweep"}, {"mu", {0.1, 0.001}}, {"grid", "300"}, {"resolution", "warn"}};
  CHECK(message(j).empty());
  j = base;
  j["grid"] = "12x";
  CHECK(message(j).rfind("grid:", 0) == 0);
  j = base;
  j["grid"] = "2";
  CHECK(message(j).rfind("grid:", 0) == 0);
  j = base;
  j["grid"] = "20x20";
  CHECK(message(j).rfind("resource:", 0) == 0);
  j = {{"command", "fly"}};
  CHECK(message(j).rfind("command:", 0) == 0);
  CHECK(message(nlohmann::json::array()).rfind("config:", 0) == 0);

  TempDir tmp;
  spit(tmp.path / "bad.json", "{\"mu\": 0.1,,}");
  try {
    (void)parse_config(std::optional<std::string>((tmp.path / "bad.json").string()), {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("malformed JSON") != std::string::npos);
  }
}

TEST_CASE("flags override the file and the echo round-trips") {
  TempDir tmp;
  const nlohmann::json file = {{"command", "optimize"}, {"preset", "paper-1d-m06"},
                               {"mu", 0.05},          {"seed", 17},
                               {"m0", 0.5},           {"optimizer", {{"starts", 3}, {"armijo_c", 0.001}}},
                               {"solver", {{"fallback_dt", 0.2}}}};
  spit(tmp.path / "cfg.json", file.dump());
  ConfigOverrides f;
  f.m0 = 0.55;
  f.seed = 18;
  f.grid = "500";
  f.out = "elsewhere";
  const RunConfig c = parse_config(std::optional<std::string>((tmp.path / "cfg.json").string()), f);
  CHECK(c.command == Command::Optimize);
  CHECK(c.preset == "paper-1d-m06");
  CHECK(c.m0 == 0.55);
  CHECK(c.optim.seed == 18);
  CHECK(c.optim.starts == 3);
  CHECK(c.optim.armijo_c == 0.001);
  CHECK(c.solver.fallback_dt == 0.2);
  CHECK(c.nx == 500);
  CHECK(c.mu == std::vector<double>{0.05});
  CHECK(c.out == "elsewhere");

  CHECK(parse_config(config_to_json(c)) == c);
  CHECK(config_to_json(parse_config(config_to_json(c))) == config_to_json(c));

  // Awkward doubles survive the trip.
  RunConfig d = c;
  d.mu = {0.1 + 0.2};
  d.kappa = 1.0 / 3.0 * 3.3;
  d.m0 = 1.0 / 7.0;
  d.optim.seed = 0xffffffffffffffffull;
  const RunConfig back = parse_config(nlohmann::json::parse(config_to_json(d).dump()));
  CHECK(back.mu == d.mu);
  CHECK(back.kappa == d.kappa);
  CHECK(back.m0 == d.m0);
  CHECK(back.optim.seed == d.optim.seed);
  CHECK(back == d);
}

TEST_CASE("svg plots") {
  const Grid g = Grid::line(101);
  const ResourceField flat(ScalarField(g, 0.3), 1.0, 0.3);
  const std::string s = render_plot_svg(flat, ScalarField(g, 0.3));
  const auto tree = parse_xml(s);
  CHECK(tree.get<std::string>("svg.<xmlattr>.width") == "800");
  CHECK(tree.get<std::string>("svg.<xmlattr>.height") == "500");
  CHECK(count_substr(s, "class=\"high-resource\"") == 0);
  CHECK(count_substr(s, "<polyline") == 2);
  CHECK(s.find(">x</text>") != std::string::npos);
  CHECK(s.find(">value</text>") != std::string::npos);

  const ResourceField cr(crenel(Grid::line(1000), 1.0, 0.3), 1.0, 0.3);
  const SteadyState st = solve_steady_state(cr, {0.01, 1.0, 0.3});
  const std::string c1 = render_plot_svg(cr, st.theta, "a < b & c");
  CHECK_NOTHROW(parse_xml(c1));
  CHECK(count_substr(c1, "class=\"high-resource\"") == 1);
  CHECK(render_plot_svg(cr, st.theta, "a < b & c") == c1);

  const Grid sq = Grid::square(12, 10);
  const ResourceField m2 = random_fourier_guess(sq, 1.0, 0.3, 8);
  const SteadyState s2 = solve_steady_state(m2, {0.05, 1.0, 0.3});
  const std::string h = render_plot_svg(m2, s2.theta);
  const auto t2 = parse_xml(h);
  CHECK(t2.get<std::string>("svg.<xmlattr>.width") == "1600");
  CHECK(t2.get<std::string>("svg.<xmlattr>.height") == "500");
  CHECK(count_substr(h, "class=\"heatmap\"") == 2);
  CHECK(h == render_plot_svg(m2, s2.theta));

  CHECK_THROWS_AS(render_plot_svg(flat, ScalarField(Grid::line(50), 0.3)), InvalidArgument);
  TempDir tmp;
  emit_plot(cr, st.theta, tmp.path / "p.svg");
  CHECK(slurp(tmp.path / "p.svg") == render_plot_svg(cr, st.theta));
  CHECK_THROWS_AS(emit_plot(cr, st.theta, tmp.path / "no" / "such" / "p.svg"), IoError);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("persist results") {
  TempDir tmp;
  const SweepReport rep = small_sweep();
  REQUIRE(rep.records.size() == 2);
  REQUIRE(rep.records[0].ok);
  REQUIRE(rep.records[1].ok);
  const RunConfig cfg = sweep_config(tmp.path / "out");
  const Manifest man = persist_results(rep, cfg, cfg.out);
  CHECK(man.count("field") == 2);
  CHECK(man.count("plot") == 2);
  CHECK(man.count("report") == 1);
  CHECK(man.count("summary") == 1);
  CHECK(man.errors.empty());
  for (const auto& f : man.files) {
    const std::string content = slurp(fs::path(cfg.out) / f.path);
    CHECK(sha256_hex(content) == f.sha256);
    CHECK(content.size() == f.bytes);
  }
  const nlohmann::json on_disk = nlohmann::json::parse(slurp(fs::path(cfg.out) / "manifest.json"));
  CHECK(on_disk == man.to_json());
  CHECK(parse_config(on_disk["config"]) == cfg);

  const std::string summary = slurp(fs::path(cfg.out) / "summary.csv");
  CHECK(summary.rfind("mu,best_F,bv,jumps,bangbang_frac,seconds\n", 0) == 0);
  CHECK(count_substr(summary, "\n") == 3);

  // Same seed, same bytes.
  const std::string first = slurp(fs::path(cfg.out) / "manifest.json");
  persist_results(small_sweep(), cfg, cfg.out);
  CHECK(slurp(fs::path(cfg.out) / "manifest.json") == first);

  SUBCASE("all points failed") {
    SweepReport failed = rep;
    for (auto& r : failed.records) {
      r.ok = false;
      r.error = "steady-state solve failed";
      r.best_m.reset();
      r.best_theta.reset();
    }
    const Manifest fm = persist_results(failed, cfg, tmp.path / "failed");
    CHECK(fm.count("field") == 0);
    CHECK(fm.count("plot") == 0);
    CHECK(fm.count("report") == 1);
    REQUIRE(fm.errors.size() == 2);
    CHECK(fm.errors[0]["mu"] == 0.5);
    CHECK(fm.errors[1]["error"] == "steady-state solve failed");
  }

  SUBCASE("IO failure removes partial output") {
    const fs::path dir = tmp.path / "blocked";
    fs::create_directories(dir);
    spit(dir / "fields", "not a directory");
    CHECK_THROWS_AS(persist_results(rep, cfg, dir), IoError);
    CHECK_FALSE(fs::exists(dir / "report.json"));
    CHECK_FALSE(fs::exists(dir / "summary.csv"));
    CHECK_FALSE(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "fields"));

    spit(tmp.path / "plug", "x");
    CHECK_THROWS_AS(persist_results(rep, cfg, tmp.path / "plug" / "sub"), IoError);
  }
}

TEST_CASE("commands write their outputs") {
  TempDir tmp;
  std::ostringstream log;
  ConfigOverrides f;
  f.command = "solve";
  f.mu = std::vector<double>{0.01};
  f.grid = "400";
  f.out = (tmp.path / "solve").string();
  f.plot = true;
  const Manifest s = run_command(parse_config(nlohmann::json(), f), log);
  CHECK(s.count("field") == 2);
  CHECK(s.count("plot") == 1);
  CHECK(s.count("diagnostics") == 1);
  const auto diag = nlohmann::json::parse(slurp(tmp.path / "solve" / "diagnostics.json"));
  CHECK(diag["F"].get<double>() > 0.38);
  CHECK(log.str().find("F = ") != std::string::npos);

  // A field written by one command feeds another.
  f.command = "efficiency";
  f.mu = std::vector<double>{1.0, 0.1, 0.01};
  f.out = (tmp.path / "eff").string();
  f.plot = false;
  const RunConfig eff =
      parse_config(nlohmann::json{{"resource", (tmp.path / "solve" / "m.csv").string()}}, f);
  run_command(eff, log);
  const auto e = nlohmann::json::parse(slurp(tmp.path / "eff" / "efficiency.json"));
  CHECK(e["ratio"].get<double>() > 1.0);
  CHECK(e["ratio"].get<double>() < 3.0);

  f.command = "periodise-check";
  f.mu = std::vector<double>{0.05};
  f.grid = "129";
  f.out = (tmp.path / "per").string();
  run_command(parse_config(nlohmann::json{{"k_max", 2}}, f), log);
  const auto per = nlohmann::json::parse(slurp(tmp.path / "per" / "periodisation.json"));
  CHECK(per.size() == 3);
  for (const auto& row : per) CHECK(row["deviation"].get<double>() <= 1e-8);

  f.command = "lemma2";
  f.out = (tmp.path / "l2").string();
  run_command(parse_config(nlohmann::json{{"k_max", 1}, {"lemma2_samples", 4}}, f), log);
  const auto l2 = nlohmann::json::parse(slurp(tmp.path / "l2" / "lemma2.json"));
  CHECK(l2["bound_holds"] == true);
  CHECK(l2["eta"].get<double>() > 0.0);

  f.command = "optimize";
  f.grid = "150";
  f.mu = std::vector<double>{0.1};
  f.out = (tmp.path / "opt").string();
  const Manifest o =
      run_command(parse_config(nlohmann::json{{"optimizer", {{"starts", 2}}}}, f), log);
  CHECK(o.count("field") == 2);
  const auto run = nlohmann::json::parse(slurp(tmp.path / "opt" / "optim_run.json"));
  CHECK(run["starts"].size() == 2);
  CHECK(run["trajectory"]["F"].size() == run["trajectory"]["step"].size());
  CHECK(run["seed"] == 0);
  CHECK(read_field_csv(tmp.path / "opt" / "best_m.csv").size() == 150);
}

TEST_CASE("command-line exit codes") {
  TempDir tmp;
  const std::string out = (tmp.path / "cli").string();
  CHECK(run_cli("solve --mu 0.01 --grid 300 --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "manifest.json"));
  CHECK(run_cli("solve --mu 0.01 --m0 1.5 --out " + out) == 2);
  CHECK(run_cli("solve --mu 0.01 --preset nope --out " + out) == 2);
  CHECK(run_cli("teleport --mu 0.01") == 2);
  CHECK(run_cli("solve --mu 0.01 --grid 10x --out " + out) == 2);
  CHECK(run_cli("solve --bogus") == 2);
  CHECK(run_cli("solve") == 2);

  spit(tmp.path / "bad.json", "{ not json");
  CHECK(run_cli("solve --config " + (tmp.path / "bad.json").string()) == 2);
  spit(tmp.path / "unknown.json", R"({"mu": 0.01, "speed": 3})");
  CHECK(run_cli("solve --config " + (tmp.path / "unknown.json").string()) == 2);

  spit(tmp.path / "starved.json",
       R"({"mu": 1e-4, "grid": "2000", "solver": {"max_newton_iters": 1, "fallback_steps": 1}})");
  CHECK(run_cli("solve --config " + (tmp.path / "starved.json").string() + " --out " + out) == 3);

  spit(tmp.path / "plug", "x");
  CHECK(run_cli("solve --mu 0.01 --grid 300 --out " + (tmp.path / "plug" / "sub").string()) == 4);
  spit(tmp.path / "res.json", R"({"mu": 0.01, "resource": "/nonexistent/m.csv"})");
  CHECK(run_cli("solve --config " + (tmp.path / "res.json").string() + " --out " + out) == 4);

  CHECK(run_cli("sweep --preset paper-1d-m03 --mu 0.5,0.1 --grid 100 --plot --out " + out +
                    " --seed 4",
                "KPPFRAG_THREADS=1") == 0);
  const auto man = nlohmann::json::parse(slurp(fs::path(out) / "manifest.json"));
  CHECK(man["config"]["preset"] == "paper-1d-m03");
  CHECK(man["config"]["mu"].size() == 2);
  CHECK(man["config"]["seed"] == 4);
  int plots = 0;
  for (const auto& fentry : man["files"]) plots += fentry["kind"] == "plot";
  CHECK(plots == 2);
}
