#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optosense/sensing.hpp"
#include "optosense/sweeps.hpp"

namespace optosense {

// ---------------------------------------------------------------------------
// Parameter files
// ---------------------------------------------------------------------------

/// Parses a flat `key = value` file. Keys: kappa_hz, g_m, delta, omega_m,
/// gamma_m, drive_E, n_th. `#` starts a comment. Unknown or repeated keys and
/// unparsable numbers raise ConfigError; kappa_hz and n_th are optional.
SystemParams parse_params(std::string_view text);

/// Loads a flat parameter file, or the `params` block of a run.json sidecar
/// when the path ends in `.json`.
SystemParams load_params(const std::filesystem::path& path);

/// Applies one `key=value` override.
void apply_override(SystemParams& params, std::string_view assignment);

/// Inverse of parse_params, 17 significant digits.
std::string format_params(const SystemParams& params);

// ---------------------------------------------------------------------------
// Command orchestration
// ---------------------------------------------------------------------------

enum class Command {
  simulate,
  ensemble,
  delta,
  sweep_drive,
  sweep_coupling,
  sweep_sideband,
  sweep_quality,
  optimize_drive
};

const char* to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

/// Command-specific inputs. Fields not used by a command are ignored.
struct CommandOptions {
  std::vector<double> delta_omegas;  // relative to omega_m for sweep-sideband
  std::vector<double> values;        // swept axis values
  ShiftSign sign = ShiftSign::raise;
  bool require_stabilized = false;
  std::size_t n_trajectories = 1000;
  double J_target = 0.06;
  SweepConstraint coupling_constraint = SweepConstraint::fix_E_over_Delta;
  double E_lo = 0.0;
  double E_hi = 0.0;

  // Integrator overrides (unset = defaults for the loaded parameters).
  std::optional<double> t_end;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> max_step;
  std::optional<double> sample_interval;
};

struct RunManifest {
  Command command = Command::simulate;
  std::filesystem::path config_path;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool force = false;
  CommandOptions options;
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string error_line;  // one-line JSON object when exit_code != 0
};

/// Executes one command: loads parameters, runs it, writes the CSV output(s)
/// and a run.json sidecar into output_dir. Never overwrites existing files
/// unless `force` is set. Errors are reported through RunOutcome, not thrown.
RunOutcome run(const RunManifest& manifest);

/// Output file names a command produces (without the directory).
std::vector<std::string> output_names(Command command);

IntegratorConfig integrator_config(const SystemParams& params, const CommandOptions& options);

}  // namespace optosense
