#include "optosense/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "optosense/errors.hpp"

namespace optosense {

double shifted_frequency(double omega_m, double delta_omega, ShiftSign sign) {
  return sign == ShiftSign::raise ? omega_m + delta_omega : omega_m - delta_omega;
}

namespace {

bool densely_sampled(const Trajectory& traj, const TimeWindow& window) {
  return std::any_of(traj.dense_windows.begin(), traj.dense_windows.end(),
                     [&](const TimeWindow& w) { return w.contains(window); });
}

void require_window(const Trajectory& traj, const TimeWindow& window) {
  // Windows are built by adding lengths to t_end, so allow a few ulps.
  const double slack = 1e-9 * std::max(1.0, std::abs(window.end));
  if (!(window.end > window.begin)) throw WindowError("window is empty or reversed");
  if (traj.times.empty() || window.begin < traj.times.front() - slack ||
      window.end > traj.times.back() + slack)
    throw WindowError("window lies outside the sampled time range");
  const TimeWindow shrunk{window.begin + slack, window.end - slack};
  if (!densely_sampled(traj, shrunk))
    throw WindowError("window is not inside a densely sampled part of the trajectory");
  if (window.length() + slack < traj.period)
    throw WindowError("window is shorter than one oscillation period");
}

}  // namespace

PeakAmplitudes peak_amplitude(const Trajectory& traj, const TimeWindow& window) {
  require_window(traj, window);
  const double slack = 1e-9 * std::max(1.0, std::abs(window.end));
  auto first = std::lower_bound(traj.times.begin(), traj.times.end(), window.begin - slack);
  auto last = std::upper_bound(traj.times.begin(), traj.times.end(), window.end + slack);
  PeakAmplitudes peaks;
  for (auto it = first; it != last; ++it) {
    const auto& s = traj.states[static_cast<std::size_t>(it - traj.times.begin())];
    peaks.x_c = std::max(peaks.x_c, std::abs(s[kXc]));
    peaks.p_c = std::max(peaks.p_c, std::abs(s[kPc]));
    peaks.x_m = std::max(peaks.x_m, std::abs(s[kXm]));
    peaks.p_m = std::max(peaks.p_m, std::abs(s[kPm]));
  }
  return peaks;
}

bool stabilization_check(const Trajectory& traj, const TimeWindow& window, double tol,
                         double lag) {
  const double now = peak_amplitude(traj, window).x_c;
  const double before = peak_amplitude(traj, {window.begin - lag, window.end - lag}).x_c;
  const double scale = std::max(now, before);
  if (scale == 0.0) return true;
  return std::abs(now - before) < tol * scale;
}

double infer_mass_ratio(double delta_omega, double omega_m) {
  if (!(omega_m > 0.0)) throw DomainError("omega_m must be > 0");
  if (!(delta_omega >= 0.0) || !(delta_omega < omega_m)) {
    std::ostringstream os;
    os << "frequency shift " << delta_omega << " outside [0, omega_m=" << omega_m << ")";
    throw DomainError(os.str());
  }
  return 2.0 * delta_omega / omega_m;
}

SensingResult compare_runs(const SystemParams& params, double delta_omega, const Trajectory& ref,
                           const Trajectory& shifted, const IntegratorConfig& cfg,
                           const SensingOptions& opts) {
  const auto window = cfg.measurement_window(params.delta);
  SensingResult r;
  r.delta_omega = delta_omega;
  r.mass_ratio = infer_mass_ratio(delta_omega, params.omega_m);
  r.ref_peaks = peak_amplitude(ref, window);
  r.shifted_peaks = peak_amplitude(shifted, window);
  r.amp_ref = r.ref_peaks.x_c;
  r.amp_shifted = r.shifted_peaks.x_c;
  r.delta_xc = std::abs(r.amp_shifted - r.amp_ref);
  // A run shorter than the lag has no reference window and cannot be
  // certified as settled.
  const bool has_reference = cfg.reference_window(params.delta).begin >= 0.0;
  r.stabilized =
      has_reference &&
      stabilization_check(ref, window, opts.stabilization_tol, cfg.reference_lag) &&
      stabilization_check(shifted, window, opts.stabilization_tol, cfg.reference_lag);
  if (opts.require_stabilized && !r.stabilized)
    throw NotStabilized("peak amplitude still drifting between the reference and measurement "
                        "windows; extend t_end");
  return r;
}

SensingResult delta_xc_exact(const SystemParams& params, double delta_omega,
                             const IntegratorConfig& cfg, const SensingOptions& opts) {
  infer_mass_ratio(delta_omega, params.omega_m);
  const auto ref = integrate_means(params, params.omega_m, cfg);
  const auto shifted =
      integrate_means(params, shifted_frequency(params.omega_m, delta_omega, opts.sign), cfg);
  return compare_runs(params, delta_omega, ref, shifted, cfg, opts);
}

MeanState first_order_delta(const SystemParams& params, double delta_omega,
                            const IntegratorConfig& cfg, const FirstOrderOptions& opts) {
  params.validate();
  infer_mass_ratio(delta_omega, params.omega_m);
  if (!(cfg.max_step > 0.0) || !(cfg.t_end > 0.0) || opts.substeps_per_max_step < 1)
    throw IntegratorConfigError("first_order_delta needs max_step > 0, t_end > 0 and substeps >= 1");

  const double omega = params.omega_m;
  const double omega_shift = shifted_frequency(omega, delta_omega, opts.sign);
  const auto n = static_cast<long>(
      std::ceil(cfg.t_end / (cfg.max_step / opts.substeps_per_max_step)));
  const double h = cfg.t_end / static_cast<double>(n);

  // Zeroth-order propagator over one grid step (diagonal damping).
  MeanState decay = MeanState::Ones();
  if (opts.include_damping) {
    decay[kXc] = decay[kPc] = std::exp(-SystemParams::kappa * h);
    decay[kXm] = decay[kPm] = std::exp(-params.gamma_m * h);
  }

  struct Node {
    MeanState d;
    DynamicsMatrix dM;
    MeanState dd;
  };
  auto node = [&](double t) {
    const auto c0 = detail::coefficients(t, omega, params);
    const auto c1 = detail::coefficients(t, omega_shift, params);
    Node out{detail::drive_vector(c0, params),
             detail::dynamics_matrix(c1, params) - detail::dynamics_matrix(c0, params),
             MeanState::Zero()};
    if (opts.perturb_drive) out.dd = detail::drive_vector(c1, params) - out.d;
    return out;
  };

  // y: zeroth-order state  y(t) = int_0^t P(t, s) d(s) ds
  // z: first-order change  z(t) = int_0^t P(t, s) [dM(s) y(s) + dd(s)] ds
  MeanState y = MeanState::Zero();
  MeanState z = MeanState::Zero();
  Node prev = node(0.0);
  MeanState f_prev = prev.dd;
  for (long k = 1; k <= n; ++k) {
    const double t = k == n ? cfg.t_end : static_cast<double>(k) * h;
    const Node cur = node(t);
    y = decay.cwiseProduct(y) + 0.5 * h * (decay.cwiseProduct(prev.d) + cur.d);
    const MeanState f = cur.dM * y + cur.dd;
    z = decay.cwiseProduct(z) + 0.5 * h * (decay.cwiseProduct(f_prev) + f);
    prev = cur;
    f_prev = f;
  }
  return z;
}

void write_sensing_csv(std::ostream& os, const std::vector<SensingResult>& rows) {
  os << "delta_omega,amp_ref,amp_shifted,delta_xc,mass_ratio,stabilized\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", r.delta_omega, r.amp_ref,
                  r.amp_shifted, r.delta_xc, r.mass_ratio, r.stabilized ? "true" : "false");
    os << buf;
  }
}

}  // namespace optosense
