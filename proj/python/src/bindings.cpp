// Array-level bindings. Fields cross the boundary as float64 numpy arrays:
// shape (N,) for a line, (ny, nx) for a square. The grid is always inferred
// from the shape.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kppfrag/adjoint.hpp"
#include "kppfrag/errors.hpp"
#include "kppfrag/experiments.hpp"
#include "kppfrag/field_ops.hpp"
#include "kppfrag/io/commands.hpp"
#include "kppfrag/io/config.hpp"
#include "kppfrag/io/json_io.hpp"
#include "kppfrag/io/svg_plot.hpp"
#include "kppfrag/optimizer.hpp"
#include "kppfrag/perturbation.hpp"
#include "kppfrag/random_guess.hpp"
#include "kppfrag/steady_state.hpp"

namespace py = pybind11;
using namespace kppfrag;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid grid_of_shape(const std::vector<std::size_t>& shape) {
  if (shape.size() == 1) return Grid::line(shape[0]);
  if (shape.size() == 2) return Grid::square(shape[1], shape[0]);
  throw InvalidArgument("fields must be 1D (N,) or 2D (ny, nx) arrays");
}

Grid grid_of_spec(const py::object& spec) {
  if (py::isinstance<py::int_>(spec)) return Grid::line(spec.cast<std::size_t>());
  const auto t = spec.cast<std::vector<std::size_t>>();
  return grid_of_shape(t.size() == 2 ? std::vector<std::size_t>{t[1], t[0]} : t);
}

ScalarField to_field(const Array& a) {
  std::vector<std::size_t> shape(a.shape(), a.shape() + a.ndim());
  return ScalarField(grid_of_shape(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

// m0 is taken from the field itself when not given.
ResourceField to_resource(const Array& a, double kappa, std::optional<double> m0) {
  ScalarField f = to_field(a);
  const double target = m0 ? *m0 : mean(f);
  return ResourceField::clamped(std::move(f), kappa, target);
}

py::array_t<double> to_array(const ScalarField& f) {
  const Grid& g = f.grid();
  std::vector<py::ssize_t> shape;
  if (g.dim() == 1) {
    shape = {static_cast<py::ssize_t>(g.nx())};
  } else {
    shape = {static_cast<py::ssize_t>(g.ny()), static_cast<py::ssize_t>(g.nx())};
  }
  py::array_t<double> out(shape);
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

py::object json_to_py(const io::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

io::json py_to_json(const py::object& o) {
  if (o.is_none()) return io::json::object();
  if (py::isinstance<py::str>(o)) return io::json::parse(o.cast<std::string>());
  return io::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

OptimConfig optim_config(int starts, std::uint64_t seed, std::optional<int> max_outer_iters) {
  OptimConfig cfg;
  cfg.starts = starts;
  cfg.seed = seed;
  if (max_outer_iters) cfg.max_outer_iters = *max_outer_iters;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_kppfrag, mod) {
  mod.doc() = "Steady Fisher-KPP total population and its optimisation";

  auto base = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(mod, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NoConvergence>(mod, "NoConvergence", base.ptr());
  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(mod, "IoError", PyExc_OSError);

  mod.def("crenel", [](std::size_t n, double kappa, double m0) {
    return to_array(crenel(Grid::line(n), kappa, m0));
  }, py::arg("n"), py::arg("kappa") = 1.0, py::arg("m0") = 0.3);

  mod.def("random_fourier_guess",
          [](const py::object& grid, double kappa, double m0, std::uint64_t seed,
             std::uint64_t stream) {
            return to_array(random_fourier_guess(grid_of_spec(grid), kappa, m0, seed, stream).field());
          },
          py::arg("grid"), py::arg("kappa") = 1.0, py::arg("m0") = 0.3, py::arg("seed") = 0,
          py::arg("stream") = 0,
          "grid is N or (nx, ny); the result has shape (N,) or (ny, nx)");

  mod.def("mean", [](const Array& f) { return mean(to_field(f)); });
  mod.def("bv_seminorm", [](const Array& f) { return bv_seminorm(to_field(f)); });
  mod.def("jump_count", [](const Array& f, double threshold) {
    return jump_count(to_field(f), threshold);
  }, py::arg("field"), py::arg("threshold") = 0.5);
  mod.def("periodise", [](const Array& f, int k) { return to_array(periodise(to_field(f), k)); });
  mod.def("periodise_refined",
          [](const Array& f, int k) { return to_array(periodise_refined(to_field(f), k)); });

  mod.def("solve",
          [](const Array& m, double mu, double kappa, std::optional<double> m0) {
            const ResourceField r = to_resource(m, kappa, m0);
            const ProblemParams p{mu, kappa, r.m0()};
            SteadyState s = [&] {
              py::gil_scoped_release release;
              return solve_steady_state(r, p);
            }();
            py::dict out;
            out["theta"] = to_array(s.theta);
            out["F"] = total_population(s);
            out["iterations"] = s.iterations;
            out["residual_norm"] = s.residual_norm;
            out["used_fallback"] = s.used_fallback;
            return out;
          },
          py::arg("m"), py::arg("mu"), py::arg("kappa") = 1.0, py::arg("m0") = py::none(),
          "Positive steady state for resource m; returns theta and F = mean(theta).");

  mod.def("objective",
          [](const Array& m, double mu, double kappa) {
            const ResourceField r = to_resource(m, kappa, std::nullopt);
            py::gil_scoped_release release;
            return objective(r, mu);
          },
          py::arg("m"), py::arg("mu"), py::arg("kappa") = 1.0);

  mod.def("gradient",
          [](const Array& m, double mu, double kappa) {
            const ResourceField r = to_resource(m, kappa, std::nullopt);
            const ProblemParams p{mu, kappa, r.m0()};
            const SteadyState s = solve_steady_state(r, p);
            return to_array(objective_gradient(s.theta, solve_adjoint(r, s.theta, p)));
          },
          py::arg("m"), py::arg("mu"), py::arg("kappa") = 1.0,
          "Nodal gradient g with dF[xi] = sum(g * xi).");

  mod.def("best_perturbation",
          [](const Array& g, const Array& m, double kappa, std::optional<Array> weights) {
            const auto gv = std::span<const double>(g.data(), g.size());
            const auto mv = std::span<const double>(m.data(), m.size());
            Perturbation p = weights
                ? best_perturbation(gv, mv, kappa, std::span<const double>(weights->data(), weights->size()))
                : best_perturbation(gv, mv, kappa);
            py::array_t<double> xi(std::vector<py::ssize_t>{static_cast<py::ssize_t>(p.xi.size())});
            std::copy(p.xi.begin(), p.xi.end(), xi.mutable_data());
            return py::make_tuple(xi, p.value);
          },
          py::arg("g"), py::arg("m"), py::arg("kappa") = 1.0, py::arg("weights") = py::none(),
          "Vertex maximising sum(g*xi) subject to the box and a zero weighted sum.");

  mod.def("optimize",
          [](double mu, double m0, double kappa, const py::object& grid, int starts,
             std::uint64_t seed, std::optional<int> max_outer_iters) {
            const OptimConfig cfg = optim_config(starts, seed, max_outer_iters);
            const ProblemParams p{mu, kappa, m0};
            const Grid g = grid_of_spec(grid);
            OptimRun run = [&] {
              py::gil_scoped_release release;
              return optimize(p, g, cfg);
            }();
            py::dict out;
            out["best_m"] = to_array(run.best_m.field());
            out["best_theta"] = to_array(run.best_theta);
            out["best_F"] = run.best_F;
            out["best_start"] = run.start_index;
            out["termination"] = to_string(run.termination);
            out["report"] = json_to_py(io::optim_run_to_json(run, p, cfg));
            return out;
          },
          py::arg("mu"), py::arg("m0") = 0.3, py::arg("kappa") = 1.0, py::arg("grid") = 1000,
          py::arg("starts") = 20, py::arg("seed") = 0, py::arg("max_outer_iters") = py::none());

  mod.def("periodisation_check",
          [](const Array& m, double mu, int k_max, double kappa) {
            return json_to_py(io::periodisation_to_json(
                periodisation_check(to_resource(m, kappa, std::nullopt), mu, k_max)));
          },
          py::arg("m"), py::arg("mu"), py::arg("k_max") = 3, py::arg("kappa") = 1.0);

  mod.def("lemma2_bound_sweep",
          [](const Array& m, double underline_mu, int k_max, int samples, double kappa) {
            return json_to_py(io::lemma2_to_json(lemma2_bound_sweep(
                to_resource(m, kappa, std::nullopt), underline_mu, k_max, samples)));
          },
          py::arg("m"), py::arg("underline_mu"), py::arg("k_max") = 3, py::arg("samples") = 16,
          py::arg("kappa") = 1.0);

  mod.def("efficiency_ratio",
          [](const Array& m, const std::vector<double>& mu_list, double kappa) {
            return efficiency_ratio(to_resource(m, kappa, std::nullopt), mu_list);
          },
          py::arg("m"), py::arg("mu_list"), py::arg("kappa") = 1.0);

  mod.def("render_plot_svg",
          [](const Array& m, const Array& theta, double kappa, const std::string& title) {
            return io::render_plot_svg(to_resource(m, kappa, std::nullopt), to_field(theta), title);
          },
          py::arg("m"), py::arg("theta"), py::arg("kappa") = 1.0, py::arg("title") = "");

  mod.def("run",
          [](const std::string& command, const py::object& config, const py::dict& overrides) {
            io::ConfigOverrides f;
            f.command = command;
            for (auto [k, v] : overrides) {
              const auto key = k.cast<std::string>();
              if (key == "preset") f.preset = v.cast<std::string>();
              else if (key == "mu") f.mu = py::isinstance<py::float_>(v) || py::isinstance<py::int_>(v)
                                              ? std::vector<double>{v.cast<double>()}
                                              : v.cast<std::vector<double>>();
              else if (key == "m0") f.m0 = v.cast<double>();
              else if (key == "kappa") f.kappa = v.cast<double>();
              else if (key == "grid") f.grid = py::str(v).cast<std::string>();
              else if (key == "seed") f.seed = v.cast<std::uint64_t>();
              else if (key == "out") f.out = py::str(v).cast<std::string>();
              else if (key == "plot") f.plot = v.cast<bool>();
              else throw ConfigError(key + ": unknown override");
            }
            const io::RunConfig cfg = io::parse_config(py_to_json(config), f);
            std::ostringstream log;
            io::Manifest manifest = [&] {
              py::gil_scoped_release release;
              return io::run_command(cfg, log);
            }();
            py::dict out;
            out["manifest"] = json_to_py(manifest.to_json());
            out["dir"] = manifest.dir.string();
            out["log"] = log.str();
            return out;
          },
          py::arg("command"), py::arg("config") = py::none(), py::arg("overrides") = py::dict(),
          "Same as the command-line tool: config is a dict or JSON text, overrides "
          "mirror the flags (preset, mu, m0, kappa, grid, seed, out, plot).");
}
