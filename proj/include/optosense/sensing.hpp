#pragma once

#include <iosfwd>
#include <vector>

#include "optosense/dynamics.hpp"

namespace optosense {

/// Direction in which the perturbed run moves the mechanical frequency.
/// `raise` uses omega_m + delta_omega as written in the quadrature-change
/// definition; `lower` is the physical effect of an added mass.
enum class ShiftSign { raise, lower };

double shifted_frequency(double omega_m, double delta_omega, ShiftSign sign);

struct SensingOptions {
  ShiftSign sign = ShiftSign::raise;
  // When set, a failed stabilization check raises NotStabilized instead of
  // being reported through SensingResult::stabilized.
  bool require_stabilized = false;
  double stabilization_tol = 1e-3;
};

/// Peak |.| of each mean quadrature over a window.
struct PeakAmplitudes {
  double x_c = 0.0;
  double p_c = 0.0;
  double x_m = 0.0;
  double p_m = 0.0;
};

struct SensingResult {
  double delta_omega = 0.0;
  double amp_ref = 0.0;
  double amp_shifted = 0.0;
  double delta_xc = 0.0;  // |amp_shifted - amp_ref|
  double mass_ratio = 0.0;
  bool stabilized = false;
  PeakAmplitudes ref_peaks;
  PeakAmplitudes shifted_peaks;
};

/// Peak amplitudes over `window`, which must lie in a densely sampled part of
/// the trajectory and span at least one 2 pi / Delta period. Throws
/// WindowError otherwise.
PeakAmplitudes peak_amplitude(const Trajectory& traj, const TimeWindow& window);

/// True iff the x_c peak over `window` and over the same window shifted back
/// by `lag` agree within `tol` relative. Two zero peaks compare equal.
bool stabilization_check(const Trajectory& traj, const TimeWindow& window, double tol = 1e-3,
                         double lag = 50.0);

/// Dm/m = 2 Dw/w from the frequency-mass relation of a resonator.
/// Throws DomainError unless 0 <= delta_omega < omega_m.
double infer_mass_ratio(double delta_omega, double omega_m);

/// Builds a SensingResult from an already integrated reference/shifted pair.
SensingResult compare_runs(const SystemParams& params, double delta_omega, const Trajectory& ref,
                           const Trajectory& shifted, const IntegratorConfig& cfg,
                           const SensingOptions& opts = {});

/// Integrates the reference and the frequency-shifted system and compares
/// their stabilized x_c peak amplitudes.
SensingResult delta_xc_exact(const SystemParams& params, double delta_omega,
                             const IntegratorConfig& cfg, const SensingOptions& opts = {});

struct FirstOrderOptions {
  ShiftSign sign = ShiftSign::raise;
  // Also perturb d(t), which depends on omega_m through the mechanical drive.
  bool perturb_drive = false;
  // Keep the zeroth-order (pure damping) propagators around the perturbation.
  // Without them the expansion reduces to the bare double integral of
  // (M' - M) d, which is only the J -> 0 limit of a damping-free system.
  bool include_damping = true;
  // Quadrature grid spacing as a fraction of cfg.max_step.
  int substeps_per_max_step = 8;
};

/// First-order (in the coupling) change of the state at cfg.t_end caused by
/// moving the mechanical frequency, evaluated with nested trapezoidal sums.
MeanState first_order_delta(const SystemParams& params, double delta_omega,
                            const IntegratorConfig& cfg, const FirstOrderOptions& opts = {});

/// `delta_omega,amp_ref,amp_shifted,delta_xc,mass_ratio,stabilized`
void write_sensing_csv(std::ostream& os, const std::vector<SensingResult>& rows);

}  // namespace optosense
