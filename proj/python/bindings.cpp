#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "optosense/errors.hpp"
#include "optosense/io.hpp"
#include "optosense/stochastic.hpp"

namespace py = pybind11;
using namespace optosense;

namespace {

py::array_t<double> times_array(const Trajectory& t) {
  return py::array_t<double>(static_cast<py::ssize_t>(t.size()), t.times.data());
}

py::array_t<double> rows_array(const std::vector<MeanState>& states) {
  py::array_t<double> out({static_cast<py::ssize_t>(states.size()), py::ssize_t{4}});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < view.shape(0); ++i)
    for (py::ssize_t q = 0; q < 4; ++q) view(i, q) = states[static_cast<std::size_t>(i)][q];
  return out;
}

ShiftSign parse_sign(const std::string& s) {
  if (s == "raise") return ShiftSign::raise;
  if (s == "lower") return ShiftSign::lower;
  throw py::value_error("sign must be 'raise' or 'lower'");
}

SensingOptions sensing_options(const std::string& sign, bool require_stabilized) {
  SensingOptions o;
  o.sign = parse_sign(sign);
  o.require_stabilized = require_stabilized;
  return o;
}

}  // namespace

PYBIND11_MODULE(_optosense, m) {
  m.doc() = "Mean-field and stochastic simulation of an optomechanical mass sensor";
  m.attr("__version__") = OPTOSENSE_PY_VERSION;

  static py::exception<Error> error(m, "OptosenseError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("module") = e.module();
      exc.attr("kind") = e.kind();
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init([](double g_m, double delta, double omega_m, double gamma_m, double drive_E,
                       double n_th, double kappa_hz) {
             return SystemParams{kappa_hz, g_m, delta, omega_m, gamma_m, drive_E, n_th};
           }),
           py::arg("g_m"), py::arg("delta"), py::arg("omega_m"),
           py::arg("gamma_m"), py::arg("drive_E"), py::arg("n_th") = 0.0,
           py::arg("kappa_hz") = 0.0)
      .def(py::init<>())
      .def_readwrite("kappa_hz", &SystemParams::kappa_hz)
      .def_readwrite("g_m", &SystemParams::g_m)
      .def_readwrite("delta", &SystemParams::delta)
      .def_readwrite("omega_m", &SystemParams::omega_m)
      .def_readwrite("gamma_m", &SystemParams::gamma_m)
      .def_readwrite("drive_E", &SystemParams::drive_E)
      .def_readwrite("n_th", &SystemParams::n_th)
      .def_property_readonly("J", &SystemParams::coupling_J)
      .def("validate", &SystemParams::validate)
      .def("validity_warning", &SystemParams::validity_warning)
      .def(py::self == py::self)
      .def("__repr__", [](const SystemParams& p) { return "SystemParams(\n" + format_params(p) + ")"; });

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_static("defaults_for", &IntegratorConfig::defaults_for)
      .def_readwrite("rel_tol", &IntegratorConfig::rel_tol)
      .def_readwrite("abs_tol", &IntegratorConfig::abs_tol)
      .def_readwrite("max_step", &IntegratorConfig::max_step)
      .def_readwrite("min_step", &IntegratorConfig::min_step)
      .def_readwrite("t_end", &IntegratorConfig::t_end)
      .def_readwrite("sample_interval", &IntegratorConfig::sample_interval)
      .def_readwrite("window_length", &IntegratorConfig::window_length)
      .def_readwrite("window_interval", &IntegratorConfig::window_interval)
      .def_readwrite("reference_lag", &IntegratorConfig::reference_lag)
      .def("measurement_window", [](const IntegratorConfig& c, double delta) {
        const auto w = c.measurement_window(delta);
        return py::make_tuple(w.begin, w.end);
      });

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("times", &times_array)
      .def_property_readonly("states", [](const Trajectory& t) { return rows_array(t.states); })
      .def_readonly("params_hash", &Trajectory::params_hash)
      .def("__len__", &Trajectory::size);

  py::class_<SensingResult>(m, "SensingResult")
      .def_readonly("delta_omega", &SensingResult::delta_omega)
      .def_readonly("amp_ref", &SensingResult::amp_ref)
      .def_readonly("amp_shifted", &SensingResult::amp_shifted)
      .def_readonly("delta_xc", &SensingResult::delta_xc)
      .def_readonly("mass_ratio", &SensingResult::mass_ratio)
      .def_readonly("stabilized", &SensingResult::stabilized);

  py::class_<EnsembleResult>(m, "EnsembleResult")
      .def_property_readonly("times",
                             [](const EnsembleResult& r) { return times_array(r.mean_trajectory); })
      .def_property_readonly("mean",
                             [](const EnsembleResult& r) { return rows_array(r.mean_trajectory.states); })
      .def_property_readonly("stderr",
                             [](const EnsembleResult& r) { return rows_array(r.stderr_trajectory); })
      .def_readonly("n_trajectories", &EnsembleResult::n_trajectories);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("axis_value", &SweepRow::axis_value)
      .def_readonly("delta_omega", &SweepRow::delta_omega)
      .def_readonly("delta_xc", &SweepRow::delta_xc)
      .def_readonly("amp_ref", &SweepRow::amp_ref)
      .def_readonly("amp_shifted", &SweepRow::amp_shifted)
      .def_readonly("status", &SweepRow::status)
      .def("ok", &SweepRow::ok);

  m.def("drive_envelope", &drive_envelope, py::arg("t"), py::arg("params"));
  m.def(
      "frame_offset",
      [](double t, const SystemParams& p) {
        const auto o = frame_offset(t, p);
        return py::make_tuple(o.x_off, o.p_off);
      },
      py::arg("t"), py::arg("params"));

  // Long computations release the GIL.
  m.def(
      "integrate_means",
      [](const SystemParams& p, std::optional<double> omega, std::optional<IntegratorConfig> cfg) {
        return integrate_means(p, omega.value_or(p.omega_m),
                               cfg.value_or(IntegratorConfig::defaults_for(p)));
      },
      py::arg("params"), py::arg("omega_m_eff") = py::none(), py::arg("cfg") = py::none(),
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "delta_xc_exact",
      [](const SystemParams& p, double dw, std::optional<IntegratorConfig> cfg,
         const std::string& sign, bool require_stabilized) {
        return delta_xc_exact(p, dw, cfg.value_or(IntegratorConfig::defaults_for(p)),
                              sensing_options(sign, require_stabilized));
      },
      py::arg("params"), py::arg("delta_omega"), py::arg("cfg") = py::none(),
      py::arg("sign") = "raise", py::arg("require_stabilized") = false,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "first_order_delta",
      [](const SystemParams& p, double dw, std::optional<IntegratorConfig> cfg,
         bool perturb_drive, bool include_damping) {
        FirstOrderOptions o;
        o.perturb_drive = perturb_drive;
        o.include_damping = include_damping;
        const MeanState d = first_order_delta(p, dw, cfg.value_or(IntegratorConfig::defaults_for(p)), o);
        return std::vector<double>(d.data(), d.data() + 4);
      },
      py::arg("params"), py::arg("delta_omega"), py::arg("cfg") = py::none(),
      py::arg("perturb_drive") = false, py::arg("include_damping") = true,
      py::call_guard<py::gil_scoped_release>());

  m.def("infer_mass_ratio", &infer_mass_ratio, py::arg("delta_omega"), py::arg("omega_m"));

  m.def(
      "sample_trajectory",
      [](const SystemParams& p, std::uint64_t seed, std::size_t index, std::size_t n,
         std::optional<IntegratorConfig> cfg, double noise_scale) {
        NoiseSpec noise{p.n_th, seed, n, noise_scale};
        return sample_trajectory(p, p.omega_m, noise, index,
                                 cfg.value_or(IntegratorConfig::defaults_for(p)));
      },
      py::arg("params"), py::arg("seed"), py::arg("index"), py::arg("n_trajectories"),
      py::arg("cfg") = py::none(), py::arg("noise_scale") = 1.0,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "ensemble_mean",
      [](const SystemParams& p, std::uint64_t seed, std::size_t n,
         std::optional<IntegratorConfig> cfg, double noise_scale) {
        NoiseSpec noise{p.n_th, seed, n, noise_scale};
        return ensemble_mean(p, p.omega_m, noise, cfg.value_or(IntegratorConfig::defaults_for(p)));
      },
      py::arg("params"), py::arg("seed"), py::arg("n_trajectories"), py::arg("cfg") = py::none(),
      py::arg("noise_scale") = 1.0, py::call_guard<py::gil_scoped_release>());

  auto sweep_cfg = [](const SystemParams& p, std::optional<IntegratorConfig> cfg) {
    if (cfg) return *cfg;
    auto c = IntegratorConfig::defaults_for(p);
    c.max_step = 0.0;
    return c;
  };
  m.def(
      "sweep_drive",
      [=](const SystemParams& p, const std::vector<double>& E, const std::vector<double>& dws,
          std::optional<IntegratorConfig> cfg, const std::string& sign) {
        return sweep_drive(p, E, dws, sweep_cfg(p, cfg), sensing_options(sign, false)).rows;
      },
      py::arg("params"), py::arg("E_values"), py::arg("delta_omegas"), py::arg("cfg") = py::none(),
      py::arg("sign") = "raise", py::call_guard<py::gil_scoped_release>());
  m.def(
      "sweep_coupling",
      [=](const SystemParams& p, const std::vector<double>& g, const std::vector<double>& dws,
          std::optional<IntegratorConfig> cfg, const std::string& sign) {
        return sweep_coupling(p, g, dws, sweep_cfg(p, cfg), SweepConstraint::fix_E_over_Delta,
                              sensing_options(sign, false))
            .rows;
      },
      py::arg("params"), py::arg("gm_values"), py::arg("delta_omegas"),
      py::arg("cfg") = py::none(), py::arg("sign") = "raise");
  m.def(
      "sweep_sideband",
      [=](const SystemParams& p, const std::vector<double>& w, const std::vector<double>& ratios,
          double J, std::optional<IntegratorConfig> cfg, const std::string& sign) {
        return sweep_sideband(p, w, ratios, J, sweep_cfg(p, cfg), sensing_options(sign, false)).rows;
      },
      py::arg("params"), py::arg("omega_values"), py::arg("delta_ratios"), py::arg("J") = 0.06,
      py::arg("cfg") = py::none(), py::arg("sign") = "raise");
  m.def(
      "sweep_quality",
      [=](const SystemParams& p, const std::vector<double>& Q, const std::vector<double>& dws,
          std::optional<IntegratorConfig> cfg, const std::string& sign) {
        return sweep_quality(p, Q, dws, sweep_cfg(p, cfg), sensing_options(sign, false)).rows;
      },
      py::arg("params"), py::arg("Q_values"), py::arg("delta_omegas"), py::arg("cfg") = py::none(),
      py::arg("sign") = "raise", py::call_guard<py::gil_scoped_release>());

  m.def(
      "find_optimal_drive",
      [](const SystemParams& p, double dw, double lo, double hi,
         std::optional<IntegratorConfig> cfg) {
        const auto o = find_optimal_drive(p, dw, lo, hi,
                                          cfg.value_or(IntegratorConfig::defaults_for(p)));
        return py::make_tuple(o.argmax, o.value, o.evaluations);
      },
      py::arg("params"), py::arg("delta_omega"), py::arg("E_lo"), py::arg("E_hi"),
      py::arg("cfg") = py::none(),
      py::call_guard<py::gil_scoped_release>());

  m.def("parse_params", &parse_params, py::arg("text"));
  m.def("load_params", &load_params, py::arg("path"));

  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config,
         const std::filesystem::path& out, std::vector<double> delta_omegas,
         std::vector<double> values, std::vector<std::string> overrides,
         std::optional<std::uint64_t> seed, bool force, const std::string& sign,
         std::optional<double> t_end, std::size_t n_trajectories, double J, double E_lo,
         double E_hi) {
        const auto c = parse_command(command);
        if (!c) throw py::value_error("unknown command '" + command + "'");
        RunManifest m;
        m.command = *c;
        m.config_path = config;
        m.output_dir = out;
        m.seed = seed;
        m.overrides = std::move(overrides);
        m.force = force;
        m.options.delta_omegas = std::move(delta_omegas);
        m.options.values = std::move(values);
        m.options.sign = parse_sign(sign);
        m.options.t_end = t_end;
        m.options.n_trajectories = n_trajectories;
        m.options.J_target = J;
        m.options.E_lo = E_lo;
        m.options.E_hi = E_hi;
        RunOutcome o;
        {
          py::gil_scoped_release release;
          o = run(m);
        }
        return py::make_tuple(o.exit_code, o.files, o.error_line);
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::kw_only(),
      py::arg("delta_omegas") = std::vector<double>{}, py::arg("values") = std::vector<double>{},
      py::arg("overrides") = std::vector<std::string>{}, py::arg("seed") = py::none(),
      py::arg("force") = false, py::arg("sign") = "raise", py::arg("t_end") = py::none(),
      py::arg("n_trajectories") = 1000, py::arg("J") = 0.06, py::arg("E_lo") = 0.0,
      py::arg("E_hi") = 0.0,
      "Runs one CLI command; returns (exit_code, files, error_line).");
}
