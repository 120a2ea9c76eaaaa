#include <fstream>
#include <json.hpp>
#include <sstream>

#include "optosense/errors.hpp"
#include "optosense/io.hpp"
#include "optosense/stochastic.hpp"

#ifndef OPTOSENSE_VERSION
#define OPTOSENSE_VERSION "unknown"
#endif

namespace optosense {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::simulate, "simulate"},
    {Command::ensemble, "ensemble"},
    {Command::delta, "delta"},
    {Command::sweep_drive, "sweep-drive"},
    {Command::sweep_coupling, "sweep-coupling"},
    {Command::sweep_sideband, "sweep-sideband"},
    {Command::sweep_quality, "sweep-quality"},
    {Command::optimize_drive, "optimize-drive"},
};

json params_json(const SystemParams& p) {
  return {{"kappa_hz", p.kappa_hz}, {"g_m", p.g_m},         {"delta", p.delta},
          {"omega_m", p.omega_m},   {"gamma_m", p.gamma_m}, {"drive_E", p.drive_E},
          {"n_th", p.n_th}};
}

json cfg_json(const IntegratorConfig& c) {
  return {{"rel_tol", c.rel_tol},
          {"abs_tol", c.abs_tol},
          {"max_step", c.max_step},
          {"min_step", c.min_step},
          {"t_end", c.t_end},
          {"sample_interval", c.sample_interval},
          {"window_length", c.window_length},
          {"window_interval", c.window_interval},
          {"reference_lag", c.reference_lag}};
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

double single_shift(const CommandOptions& o) {
  if (o.delta_omegas.size() > 1)
    throw ConfigError("this command takes a single --delta-omega value");
  return o.delta_omegas.empty() ? 0.0 : o.delta_omegas.front();
}

std::vector<double> require_list(const std::vector<double>& v, const char* flag) {
  if (v.empty()) throw ConfigError(std::string("missing ") + flag);
  return v;
}

json physical_units(const SystemParams& p, const std::vector<double>& shifts) {
  json out = json::object();
  if (p.kappa_hz <= 0.0) return out;
  out["kappa_hz"] = p.kappa_hz;
  out["omega_m_hz"] = p.omega_m * p.kappa_hz;
  out["delta_hz"] = p.delta * p.kappa_hz;
  json rows = json::array();
  for (double s : shifts) {
    json row{{"delta_omega", s}, {"delta_omega_hz", s * p.kappa_hz}};
    if (s >= 0.0 && s < p.omega_m) row["mass_ratio"] = infer_mass_ratio(s, p.omega_m);
    rows.push_back(row);
  }
  out["shifts"] = rows;
  return out;
}

// Runs the command and returns command-specific metadata for the sidecar.
json execute(const RunManifest& m, const SystemParams& params, const IntegratorConfig& cfg,
             const fs::path& dir) {
  const auto& o = m.options;
  SensingOptions sensing;
  sensing.sign = o.sign;
  sensing.require_stabilized = o.require_stabilized;
  json meta = json::object();

  switch (m.command) {
    case Command::simulate: {
      const double shift = single_shift(o);
      const double omega = shifted_frequency(params.omega_m, shift, o.sign);
      const auto traj = integrate_means(params, omega, cfg);
      auto out = open_output(dir / "trajectory.csv");
      write_trajectory_csv(out, traj);
      const auto window = cfg.measurement_window(params.delta);
      const auto peaks = peak_amplitude(traj, window);
      meta["delta_omega"] = shift;
      meta["omega_m_eff"] = omega;
      meta["peaks"] = {{"x_c", peaks.x_c}, {"p_c", peaks.p_c}, {"x_m", peaks.x_m}, {"p_m", peaks.p_m}};
      meta["window"] = {window.begin, window.end};
      meta["physical_units"] = physical_units(params, {shift});
      break;
    }
    case Command::ensemble: {
      const double shift = single_shift(o);
      const double omega = shifted_frequency(params.omega_m, shift, o.sign);
      const auto noise = NoiseSpec::for_params(params, m.seed.value_or(0), o.n_trajectories);
      const auto result = ensemble_mean(params, omega, noise, cfg);
      auto out = open_output(dir / "ensemble.csv");
      write_ensemble_csv(out, result);
      meta["delta_omega"] = shift;
      meta["n_trajectories"] = o.n_trajectories;
      meta["stochastic_step"] = stochastic_step(cfg);
      break;
    }
    case Command::delta: {
      const auto shifts = require_list(o.delta_omegas, "--delta-omega");
      for (double s : shifts) infer_mass_ratio(s, params.omega_m);
      const auto ref = integrate_means(params, params.omega_m, cfg);
      std::vector<SensingResult> rows;
      for (double s : shifts) {
        if (s == 0.0) {
          rows.push_back(compare_runs(params, s, ref, ref, cfg, sensing));
        } else {
          const auto shifted =
              integrate_means(params, shifted_frequency(params.omega_m, s, o.sign), cfg);
          rows.push_back(compare_runs(params, s, ref, shifted, cfg, sensing));
        }
      }
      auto out = open_output(dir / "sensing.csv");
      write_sensing_csv(out, rows);
      meta["physical_units"] = physical_units(params, shifts);
      break;
    }
    case Command::sweep_drive:
    case Command::sweep_coupling:
    case Command::sweep_sideband:
    case Command::sweep_quality: {
      const auto values = require_list(o.values, "--values");
      const auto shifts = require_list(o.delta_omegas, "--delta-omega");
      SweepResult result;
      // Sweeps pick max_step per point unless it was given explicitly.
      IntegratorConfig sweep_cfg = cfg;
      if (!o.max_step) sweep_cfg.max_step = 0.0;
      if (m.command == Command::sweep_drive)
        result = sweep_drive(params, values, shifts, sweep_cfg, sensing);
      else if (m.command == Command::sweep_coupling)
        result = sweep_coupling(params, values, shifts, sweep_cfg, o.coupling_constraint, sensing);
      else if (m.command == Command::sweep_sideband)
        result = sweep_sideband(params, values, shifts, o.J_target, sweep_cfg, sensing);
      else
        result = sweep_quality(params, values, shifts, sweep_cfg, sensing);
      auto out = open_output(dir / "sweep.csv");
      write_sweep_csv(out, result);
      meta["axis"] = to_string(result.axis);
      meta["constraint"] = to_string(result.constraint);
      if (m.command == Command::sweep_sideband) meta["J_target"] = o.J_target;
      std::size_t failed = 0;
      for (const auto& r : result.rows) failed += r.ok() ? 0 : 1;
      meta["failed_rows"] = failed;
      break;
    }
    case Command::optimize_drive: {
      const auto shifts = require_list(o.delta_omegas, "--delta-omega");
      if (!(o.E_hi > o.E_lo)) throw ConfigError("optimize-drive needs --e-lo < --e-hi");
      auto out = open_output(dir / "optimum.csv");
      out << "delta_omega,E_opt,delta_xc_opt,evaluations\n";
      json prescans = json::array();
      for (double s : shifts) {
        const auto opt = find_optimal_drive(params, s, o.E_lo, o.E_hi, cfg, sensing);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu\n", s, opt.argmax, opt.value,
                      opt.evaluations);
        out << buf;
        prescans.push_back({{"delta_omega", s}, {"prescan", opt.prescan}});
      }
      meta["prescans"] = prescans;
      break;
    }
  }
  return meta;
}

std::string error_json(const std::string& module, const std::string& kind,
                       const std::string& message) {
  return json{{"error", {{"module", module}, {"kind", kind}, {"message", message}}}}.dump();
}

}  // namespace

const char* to_string(Command command) {
  for (const auto& [c, name] : kCommands)
    if (c == command) return name.data();
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [c, n] : kCommands)
    if (n == name) return c;
  return std::nullopt;
}

std::vector<std::string> output_names(Command command) {
  switch (command) {
    case Command::simulate: return {"trajectory.csv", "run.json"};
    case Command::ensemble: return {"ensemble.csv", "run.json"};
    case Command::delta: return {"sensing.csv", "run.json"};
    case Command::optimize_drive: return {"optimum.csv", "run.json"};
    default: return {"sweep.csv", "run.json"};
  }
}

IntegratorConfig integrator_config(const SystemParams& params, const CommandOptions& o) {
  auto cfg = IntegratorConfig::defaults_for(params);
  if (o.t_end) cfg.t_end = *o.t_end;
  if (o.rel_tol) cfg.rel_tol = *o.rel_tol;
  if (o.abs_tol) cfg.abs_tol = *o.abs_tol;
  if (o.max_step) cfg.max_step = *o.max_step;
  if (o.sample_interval) cfg.sample_interval = *o.sample_interval;
  return cfg;
}

RunOutcome run(const RunManifest& m) {
  RunOutcome outcome;
  try {
    if (m.config_path.empty()) throw ConfigError("missing --config");
    if (m.output_dir.empty()) throw ConfigError("missing --out");
    SystemParams params = load_params(m.config_path);
    for (const auto& o : m.overrides) apply_override(params, o);
    params.validate();
    const auto cfg = integrator_config(params, m.options);

    std::error_code ec;
    fs::create_directories(m.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + m.output_dir.string() + "'");
    for (const auto& name : output_names(m.command)) {
      const auto path = m.output_dir / name;
      if (fs::exists(path) && !m.force)
        throw ConfigError("refusing to overwrite '" + path.string() + "' (pass --force)");
    }

    const json meta = execute(m, params, cfg, m.output_dir);

    json sidecar;
    sidecar["tool"] = "optosense";
    sidecar["version"] = OPTOSENSE_VERSION;
    sidecar["command"] = to_string(m.command);
    sidecar["params"] = params_json(params);
    sidecar["J"] = params.coupling_J();
    sidecar["integrator"] = cfg_json(cfg);
    sidecar["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    sidecar["overrides"] = m.overrides;
    const auto& o = m.options;
    sidecar["options"] = {{"delta_omegas", o.delta_omegas},
                          {"values", o.values},
                          {"sign", o.sign == ShiftSign::raise ? "raise" : "lower"},
                          {"require_stabilized", o.require_stabilized},
                          {"n_trajectories", o.n_trajectories},
                          {"J_target", o.J_target},
                          {"coupling_constraint", to_string(o.coupling_constraint)},
                          {"E_lo", o.E_lo},
                          {"E_hi", o.E_hi}};
    json warnings = json::array();
    if (auto w = params.validity_warning()) warnings.push_back(*w);
    sidecar["warnings"] = warnings;
    sidecar["result"] = meta;
    json files = json::array();
    for (const auto& name : output_names(m.command)) {
      outcome.files.push_back(m.output_dir / name);
      files.push_back(name);
    }
    sidecar["outputs"] = files;
    auto out = open_output(m.output_dir / "run.json");
    out << sidecar.dump(2) << "\n";
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.error_line = error_json(e.module(), e.kind(), e.what());
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.error_line = error_json("cli-io", "InternalError", e.what());
  }
  return outcome;
}

}  // namespace optosense
