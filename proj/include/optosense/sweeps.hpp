#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "optosense/sensing.hpp"

namespace optosense {

enum class SweepAxis { drive_E, g_m, sideband, quality };

/// How the remaining parameters follow the swept one.
///  - none:              only the swept field changes
///  - fix_E_over_Delta:  drive_E tracks Delta so E/Delta stays at its base value
///  - fix_J:             drive_E = J * Delta / g_m with J held at its target
enum class SweepConstraint { none, fix_E_over_Delta, fix_J };

const char* to_string(SweepAxis axis);
const char* to_string(SweepConstraint constraint);

struct SweepSpec {
  SweepAxis axis = SweepAxis::drive_E;
  std::vector<double> values;
  // Absolute shifts (units of kappa) for drive_E/g_m/quality; relative shifts
  // delta_omega/omega_m for the sideband axis.
  std::vector<double> delta_omegas;
  SystemParams base;
  IntegratorConfig cfg;
  SweepConstraint constraint = SweepConstraint::none;
  double J_target = 0.0;  // used by fix_J
  SensingOptions sensing;

  /// SystemParams of one grid point. Throws SweepSpecError / ParameterError.
  SystemParams params_at(double axis_value) const;
  /// Absolute frequency shift for a delta_omegas entry at this point.
  double shift_at(const SystemParams& point, double delta_omega_entry) const;
  /// Integrator settings for a point (max_step follows the point's rates).
  IntegratorConfig cfg_at(const SystemParams& point) const;

  void validate() const;
};

struct SweepRow {
  double axis_value = 0.0;
  double delta_omega = 0.0;  // absolute, units of kappa
  double delta_xc = 0.0;
  double amp_ref = 0.0;
  double amp_shifted = 0.0;
  std::string status;  // "ok", "unstabilized" or "error:<Kind>: message"

  bool ok() const { return status == "ok" || status == "unstabilized"; }
};

struct SweepResult {
  SweepAxis axis = SweepAxis::drive_E;
  SweepConstraint constraint = SweepConstraint::none;
  std::vector<SweepRow> rows;  // ordered by (axis index, delta_omega index)

  /// Rows with the given absolute shift, in axis order.
  std::vector<SweepRow> curve(double delta_omega) const;
};

/// Evaluates every (axis value, shift) pair. Per-point failures are recorded
/// in the row status and the sweep continues. Points run concurrently; the
/// result does not depend on scheduling.
SweepResult run_sweep(const SweepSpec& spec);

/// Delta X_c versus drive amplitude, g_m fixed (J grows with E).
SweepResult sweep_drive(const SystemParams& base, const std::vector<double>& E_values,
                        const std::vector<double>& delta_omegas, const IntegratorConfig& cfg,
                        const SensingOptions& sensing = {});

/// Delta X_c versus g_m with E/Delta held fixed (or J, via `constraint`).
SweepResult sweep_coupling(const SystemParams& base, const std::vector<double>& gm_values,
                           const std::vector<double>& delta_omegas, const IntegratorConfig& cfg,
                           SweepConstraint constraint = SweepConstraint::fix_E_over_Delta,
                           const SensingOptions& sensing = {});

/// Delta X_c versus omega_m/kappa with Delta = omega_m and E = J Delta / g_m.
/// `delta_ratio_values` are relative shifts delta_omega/omega_m.
SweepResult sweep_sideband(const SystemParams& base, const std::vector<double>& omega_values,
                           const std::vector<double>& delta_ratio_values, double J_target,
                           const IntegratorConfig& cfg, const SensingOptions& sensing = {});

/// Delta X_c versus Q_m = omega_m / gamma_m.
SweepResult sweep_quality(const SystemParams& base, const std::vector<double>& Q_values,
                          const std::vector<double>& delta_omegas, const IntegratorConfig& cfg,
                          const SensingOptions& sensing = {});

struct Optimum {
  double argmax = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::vector<std::pair<double, double>> prescan;  // (x, f(x))
};

/// Maximizes a unimodal objective: an 8-point pre-scan over the bracket,
/// then golden-section refinement around the best interior scan point down
/// to relative width `rel_tol`. Throws NoInteriorMax when the pre-scan
/// maximum sits on a bracket end.
Optimum maximize_bracketed(const std::function<double(double)>& objective, double lo, double hi,
                           double rel_tol = 1e-3, std::size_t prescan_points = 8);

/// Drive amplitude maximizing Delta X_c for one frequency shift.
Optimum find_optimal_drive(const SystemParams& base, double delta_omega, double E_lo, double E_hi,
                           const IntegratorConfig& cfg, const SensingOptions& sensing = {});

/// `axis,axis_value,delta_omega,delta_xc,amp_ref,amp_shifted,status`
void write_sweep_csv(std::ostream& os, const SweepResult& result);

}  // namespace optosense
