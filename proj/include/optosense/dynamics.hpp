#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "optosense/model.hpp"

namespace optosense {

/// Mean quadratures (<X_c>, <P_c>, <X_m>, <P_m>) in the frame of the linear
/// dynamics. Index with the Quadrature enum.
using MeanState = Eigen::Vector4d;
using DynamicsMatrix = Eigen::Matrix4d;
using DriveVector = Eigen::Vector4d;

enum Quadrature : int { kXc = 0, kPc = 1, kXm = 2, kPm = 3 };

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
  bool contains(const TimeWindow& other) const {
    return other.begin >= begin && other.end <= end;
  }
};

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.0;  // must be set; see defaults_for()
  double min_step = 1e-10;
  double t_end = 600.0;
  double sample_interval = 0.01;
  // Dense measurement window [t_end, t_end + window_length] and its copy
  // shifted back by reference_lag, used for the stabilization check.
  double window_length = 0.1;
  double window_interval = 2e-4;
  double reference_lag = 50.0;

  /// Defaults with max_step resolving the fastest of Delta and omega_m (with
  /// 5% headroom for perturbed mechanical frequencies) by 20 steps.
  static IntegratorConfig defaults_for(const SystemParams& params);

  /// Largest admissible max_step for the given rates.
  static double step_limit(double delta, double omega_m_eff);

  void validate(const SystemParams& params, double omega_m_eff) const;

  /// The window is extended to one full 2 pi / Delta period when
  /// window_length is shorter than that.
  TimeWindow measurement_window(double delta) const;
  TimeWindow reference_window(double delta) const;

  bool operator==(const IntegratorConfig&) const = default;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<MeanState> states;
  std::uint64_t params_hash = 0;
  std::vector<TimeWindow> dense_windows;  // densely sampled sub-ranges
  double period = 0.0;                    // 2 pi / Delta of the generating params

  std::size_t size() const { return times.size(); }
};

/// M(t) of x' = M(t) x + d(t). omega_m_eff replaces params.omega_m so that a
/// perturbed resonator can share one parameter set with the reference run.
DynamicsMatrix build_dynamics_matrix(double t, double omega_m_eff, const SystemParams& params);

/// d(t) of x' = M(t) x + d(t).
DriveVector build_drive_vector(double t, double omega_m_eff, const SystemParams& params);

/// Integrates the mean-field equations from the zero state with an adaptive
/// Dormand-Prince 5(4) scheme. Samples on a uniform grid of spacing
/// cfg.sample_interval over [0, t_end] plus the dense measurement and
/// reference windows (taken from the scheme's continuous extension).
///
/// Throws DivergenceError when |x| exceeds kDivergenceNorm and StepFailure
/// when the controller drops below cfg.min_step.
Trajectory integrate_means(const SystemParams& params, double omega_m_eff,
                           const IntegratorConfig& cfg);

/// Same integration, sampled at caller-provided times (sorted, starting at
/// 0). Used to compare against trajectories on other grids.
Trajectory integrate_means_at(const SystemParams& params, double omega_m_eff,
                              const IntegratorConfig& cfg, const std::vector<double>& times);

inline constexpr double kDivergenceNorm = 1e12;

/// CSV with header `t,x_c,p_c,x_m,p_m`, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

namespace detail {

/// E(t) and the mechanical phase evaluated once, shared by M(t) and d(t).
struct Coefficients {
  double re_E;
  double im_E;
  double abs_E2;
  double cos_wt;
  double sin_wt;
};

Coefficients coefficients(double t, double omega_m_eff, const SystemParams& params);
DynamicsMatrix dynamics_matrix(const Coefficients& c, const SystemParams& params);
DriveVector drive_vector(const Coefficients& c, const SystemParams& params);

/// Sorted, strictly increasing sample times for a run.
std::vector<double> sample_times(const IntegratorConfig& cfg, double delta,
                                 std::vector<TimeWindow>* dense_windows = nullptr);

}  // namespace detail

}  // namespace optosense
