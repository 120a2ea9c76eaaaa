#include "optosense/dynamics.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "optosense/errors.hpp"

namespace optosense {

namespace odeint = boost::numeric::odeint;

double IntegratorConfig::step_limit(double delta, double omega_m_eff) {
  return 2.0 * M_PI / (20.0 * std::max(delta, omega_m_eff));
}

IntegratorConfig IntegratorConfig::defaults_for(const SystemParams& params) {
  IntegratorConfig cfg;
  cfg.max_step = step_limit(params.delta * 1.05, params.omega_m * 1.05);
  return cfg;
}

void IntegratorConfig::validate(const SystemParams& params, double omega_m_eff) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw IntegratorConfigError(what);
  };
  require(rel_tol > 0.0 && abs_tol > 0.0, "rel_tol and abs_tol must be > 0");
  require(max_step > 0.0, "max_step must be > 0");
  const double limit = step_limit(params.delta, omega_m_eff);
  if (max_step > limit) {
    std::ostringstream os;
    os << "max_step " << max_step << " exceeds " << limit
       << " (20 steps per period of the fastest frequency)";
    throw IntegratorConfigError(os.str());
  }
  require(min_step > 0.0 && min_step < max_step, "min_step must lie in (0, max_step)");
  require(t_end > 0.0, "t_end must be > 0");
  require(sample_interval > 0.0, "sample_interval must be > 0");
  require(window_length > 0.0 && window_interval > 0.0,
          "window_length and window_interval must be > 0");
  require(window_interval <= window_length, "window_interval must not exceed window_length");
  require(reference_lag >= 0.0, "reference_lag must be >= 0");
}

TimeWindow IntegratorConfig::measurement_window(double delta) const {
  const double len = std::max(window_length, 2.0 * M_PI / delta);
  return {t_end, t_end + len};
}

TimeWindow IntegratorConfig::reference_window(double delta) const {
  const auto w = measurement_window(delta);
  return {w.begin - reference_lag, w.end - reference_lag};
}

namespace detail {

Coefficients coefficients(double t, double omega_m_eff, const SystemParams& params) {
  const auto E = drive_envelope(t, params);
  const auto ph = accurate_phase(omega_m_eff, t);
  return {E.real(), E.imag(), std::norm(E), ph.cos, ph.sin};
}

DynamicsMatrix dynamics_matrix(const Coefficients& c, const SystemParams& p) {
  const double g2 = 2.0 * p.g_m;
  DynamicsMatrix M = DynamicsMatrix::Zero();
  M(kXc, kXc) = -SystemParams::kappa;
  M(kPc, kPc) = -SystemParams::kappa;
  M(kXm, kXm) = -p.gamma_m;
  M(kPm, kPm) = -p.gamma_m;

  M(kXc, kXm) = -g2 * c.im_E * c.cos_wt;
  M(kXc, kPm) = -g2 * c.im_E * c.sin_wt;
  M(kPc, kXm) = g2 * c.re_E * c.cos_wt;
  M(kPc, kPm) = g2 * c.re_E * c.sin_wt;

  M(kXm, kXc) = -g2 * c.sin_wt * c.re_E;
  M(kXm, kPc) = -g2 * c.sin_wt * c.im_E;
  M(kPm, kXc) = g2 * c.cos_wt * c.re_E;
  M(kPm, kPc) = g2 * c.cos_wt * c.im_E;
  return M;
}

DriveVector drive_vector(const Coefficients& c, const SystemParams& p) {
  constexpr double k = SystemParams::kappa;
  return {-M_SQRT2 * k * c.re_E, -M_SQRT2 * k * c.im_E, -p.g_m * c.sin_wt * c.abs_E2,
          p.g_m * c.cos_wt * c.abs_E2};
}

namespace {

void append_window(std::vector<double>& out, const TimeWindow& w, double interval) {
  const auto n = static_cast<std::size_t>(std::ceil(w.length() / interval - 1e-9));
  for (std::size_t i = 0; i <= n; ++i)
    out.push_back(i == n ? w.end : w.begin + w.length() * static_cast<double>(i) / n);
}

}  // namespace

std::vector<double> sample_times(const IntegratorConfig& cfg, double delta,
                                 std::vector<TimeWindow>* dense_windows) {
  std::vector<double> out;
  const auto n_uniform =
      static_cast<std::size_t>(std::floor(cfg.t_end / cfg.sample_interval + 1e-9));
  out.reserve(n_uniform + 1);
  for (std::size_t k = 0; k <= n_uniform; ++k)
    out.push_back(std::min(cfg.t_end, static_cast<double>(k) * cfg.sample_interval));

  std::vector<TimeWindow> windows;
  const auto ref = cfg.reference_window(delta);
  if (ref.begin >= 0.0 && cfg.reference_lag > 0.0) windows.push_back(ref);
  windows.push_back(cfg.measurement_window(delta));
  for (const auto& w : windows) append_window(out, w, cfg.window_interval);

  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  unique.reserve(out.size());
  for (double t : out) {
    if (!unique.empty() && t - unique.back() <= 1e-12 * std::max(1.0, t)) continue;
    unique.push_back(t);
  }
  if (dense_windows) *dense_windows = windows;
  return unique;
}

}  // namespace detail

DynamicsMatrix build_dynamics_matrix(double t, double omega_m_eff, const SystemParams& params) {
  return detail::dynamics_matrix(detail::coefficients(t, omega_m_eff, params), params);
}

DriveVector build_drive_vector(double t, double omega_m_eff, const SystemParams& params) {
  return detail::drive_vector(detail::coefficients(t, omega_m_eff, params), params);
}

namespace {

using OdeState = std::array<double, 4>;

struct MeanFieldSystem {
  const SystemParams& params;
  double omega;

  void operator()(const OdeState& x, OdeState& dxdt, double t) const {
    const auto c = detail::coefficients(t, omega, params);
    const Eigen::Map<const MeanState> xs(x.data());
    Eigen::Map<MeanState> out(dxdt.data());
    out.noalias() = detail::dynamics_matrix(c, params) * xs + detail::drive_vector(c, params);
  }
};

MeanState to_state(const OdeState& x) { return {x[0], x[1], x[2], x[3]}; }

double norm(const OdeState& x) {
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
}

}  // namespace

Trajectory integrate_means(const SystemParams& params, double omega_m_eff,
                           const IntegratorConfig& cfg) {
  std::vector<TimeWindow> windows;
  const auto times = detail::sample_times(cfg, params.delta, &windows);
  auto traj = integrate_means_at(params, omega_m_eff, cfg, times);
  traj.dense_windows = std::move(windows);
  return traj;
}

Trajectory integrate_means_at(const SystemParams& params, double omega_m_eff,
                              const IntegratorConfig& cfg, const std::vector<double>& times) {
  params.validate();
  if (!(omega_m_eff > 0.0)) throw ParameterError("omega_m_eff must be > 0");
  cfg.validate(params, omega_m_eff);
  if (times.empty() || times.front() != 0.0 || !std::is_sorted(times.begin(), times.end()))
    throw IntegratorConfigError("sample times must be sorted and start at 0");

  Trajectory traj;
  traj.params_hash = params.fingerprint();
  traj.period = 2.0 * M_PI / params.delta;
  traj.times = times;
  traj.states.reserve(traj.times.size());

  using Stepper = odeint::runge_kutta_dopri5<OdeState>;
  auto dense = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, cfg.max_step, Stepper());
  MeanFieldSystem system{params, omega_m_eff};

  OdeState x{0.0, 0.0, 0.0, 0.0};
  dense.initialize(x, 0.0, std::min(cfg.max_step, 1e-3));
  traj.states.push_back(to_state(x));

  const double t_last = traj.times.back();
  std::size_t k = 1;
  while (k < traj.times.size()) {
    try {
      dense.do_step(std::ref(system));
    } catch (const odeint::odeint_error& e) {
      throw StepFailure(std::string("step size control failed: ") + e.what());
    }
    const double accepted = dense.current_time() - dense.previous_time();
    const double t_now = dense.current_time();
    if (accepted < cfg.min_step && t_now < t_last) {
      std::ostringstream os;
      os << "accepted step " << accepted << " below min_step " << cfg.min_step << " at t=" << t_now;
      throw StepFailure(os.str());
    }
    const double n = norm(dense.current_state());
    if (!std::isfinite(n) || n > kDivergenceNorm) {
      std::ostringstream os;
      os << "state norm " << n << " exceeds " << kDivergenceNorm << " at t=" << t_now
         << " (unstable parameters?)";
      throw DivergenceError(os.str());
    }
    while (k < traj.times.size() && traj.times[k] <= t_now) {
      dense.calc_state(traj.times[k], x);
      traj.states.push_back(to_state(x));
      ++k;
    }
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x_c,p_c,x_m,p_m\n";
  char buf[160];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.times[i], s[0], s[1],
                  s[2], s[3]);
    os << buf;
  }
}

}  // namespace optosense
