#include "optosense/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "optosense/errors.hpp"
#include "parallel.hpp"

namespace optosense {

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::drive_E: return "drive_E";
    case SweepAxis::g_m: return "g_m";
    case SweepAxis::sideband: return "sideband";
    case SweepAxis::quality: return "quality";
  }
  return "?";
}

const char* to_string(SweepConstraint constraint) {
  switch (constraint) {
    case SweepConstraint::none: return "none";
    case SweepConstraint::fix_E_over_Delta: return "fix_E_over_Delta";
    case SweepConstraint::fix_J: return "fix_J";
  }
  return "?";
}

void SweepSpec::validate() const {
  if (values.empty()) throw SweepSpecError("sweep needs at least one axis value");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) throw SweepSpecError("axis values must be strictly increasing");
  if (delta_omegas.empty()) throw SweepSpecError("sweep needs at least one frequency shift");
  if (constraint == SweepConstraint::fix_J && !(J_target > 0.0))
    throw SweepSpecError("fix_J needs J_target > 0");
}

SystemParams SweepSpec::params_at(double v) const {
  SystemParams p = base;
  const double E_over_Delta = base.drive_E / base.delta;
  switch (axis) {
    case SweepAxis::drive_E: p.drive_E = v; break;
    case SweepAxis::g_m: p.g_m = v; break;
    case SweepAxis::sideband:
      p.omega_m = v;
      p.delta = v;
      break;
    case SweepAxis::quality:
      if (!(v > 0.0)) throw SweepSpecError("quality factor must be > 0");
      p.gamma_m = p.omega_m / v;
      break;
  }
  switch (constraint) {
    case SweepConstraint::none: break;
    case SweepConstraint::fix_E_over_Delta: p.drive_E = E_over_Delta * p.delta; break;
    case SweepConstraint::fix_J:
      if (!(p.g_m > 0.0)) throw SweepSpecError("fix_J needs g_m > 0");
      p.drive_E = J_target * p.delta / p.g_m;
      break;
  }
  p.validate();
  return p;
}

double SweepSpec::shift_at(const SystemParams& point, double entry) const {
  return axis == SweepAxis::sideband ? entry * point.omega_m : entry;
}

IntegratorConfig SweepSpec::cfg_at(const SystemParams& point) const {
  IntegratorConfig c = cfg;
  if (!(c.max_step > 0.0)) c.max_step = IntegratorConfig::defaults_for(point).max_step;
  return c;
}

std::vector<SweepRow> SweepResult::curve(double delta_omega) const {
  std::vector<SweepRow> out;
  for (const auto& r : rows)
    if (r.delta_omega == delta_omega) out.push_back(r);
  return out;
}

namespace {

std::string error_status(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return "error:" + err->kind();
  return "error:exception";
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t n_shift = spec.delta_omegas.size();
  SweepResult result;
  result.axis = spec.axis;
  result.constraint = spec.constraint;
  result.rows.resize(spec.values.size() * n_shift);

  detail::parallel_for(spec.values.size(), [&](std::size_t i) {
    const double v = spec.values[i];
    auto row = [&](std::size_t j) -> SweepRow& { return result.rows[i * n_shift + j]; };
    for (std::size_t j = 0; j < n_shift; ++j) {
      row(j).axis_value = v;
      row(j).delta_omega = spec.delta_omegas[j];
    }

    SystemParams point;
    IntegratorConfig cfg;
    Trajectory ref;
    try {
      point = spec.params_at(v);
      cfg = spec.cfg_at(point);
      for (std::size_t j = 0; j < n_shift; ++j)
        row(j).delta_omega = spec.shift_at(point, spec.delta_omegas[j]);
      ref = integrate_means(point, point.omega_m, cfg);
    } catch (const std::exception& e) {
      for (std::size_t j = 0; j < n_shift; ++j) row(j).status = error_status(e);
      return;
    }

    for (std::size_t j = 0; j < n_shift; ++j) {
      SweepRow& r = row(j);
      try {
        const double shift = r.delta_omega;
        infer_mass_ratio(shift, point.omega_m);
        const SensingResult s =
            shift == 0.0
                ? compare_runs(point, shift, ref, ref, cfg, spec.sensing)
                : compare_runs(point, shift, ref,
                               integrate_means(point,
                                               shifted_frequency(point.omega_m, shift,
                                                                 spec.sensing.sign),
                                               cfg),
                               cfg, spec.sensing);
        r.delta_xc = s.delta_xc;
        r.amp_ref = s.amp_ref;
        r.amp_shifted = s.amp_shifted;
        r.status = s.stabilized ? "ok" : "unstabilized";
      } catch (const std::exception& e) {
        r.status = error_status(e);
      }
    }
  });
  return result;
}

SweepResult sweep_drive(const SystemParams& base, const std::vector<double>& E_values,
                        const std::vector<double>& delta_omegas, const IntegratorConfig& cfg,
                        const SensingOptions& sensing) {
  for (double E : E_values)
    if (!(E > 0.0)) throw SweepSpecError("drive amplitudes must be positive");
  SweepSpec spec;
  spec.axis = SweepAxis::drive_E;
  spec.values = E_values;
  spec.delta_omegas = delta_omegas;
  spec.base = base;
  spec.cfg = cfg;
  spec.sensing = sensing;
  return run_sweep(spec);
}

SweepResult sweep_coupling(const SystemParams& base, const std::vector<double>& gm_values,
                           const std::vector<double>& delta_omegas, const IntegratorConfig& cfg,
                           SweepConstraint constraint, const SensingOptions& sensing) {
  SweepSpec spec;
  spec.axis = SweepAxis::g_m;
  spec.values = gm_values;
  spec.delta_omegas = delta_omegas;
  spec.base = base;
  spec.cfg = cfg;
  spec.constraint = constraint;
  spec.J_target = base.coupling_J();
  spec.sensing = sensing;
  return run_sweep(spec);
}

SweepResult sweep_sideband(const SystemParams& base, const std::vector<double>& omega_values,
                           const std::vector<double>& delta_ratio_values, double J_target,
                           const IntegratorConfig& cfg, const SensingOptions& sensing) {
  SweepSpec spec;
  spec.axis = SweepAxis::sideband;
  spec.values = omega_values;
  spec.delta_omegas = delta_ratio_values;
  spec.base = base;
  spec.cfg = cfg;
  spec.constraint = SweepConstraint::fix_J;
  spec.J_target = J_target;
  spec.sensing = sensing;
  return run_sweep(spec);
}

SweepResult sweep_quality(const SystemParams& base, const std::vector<double>& Q_values,
                          const std::vector<double>& delta_omegas, const IntegratorConfig& cfg,
                          const SensingOptions& sensing) {
  SweepSpec spec;
  spec.axis = SweepAxis::quality;
  spec.values = Q_values;
  spec.delta_omegas = delta_omegas;
  spec.base = base;
  spec.cfg = cfg;
  spec.sensing = sensing;
  return run_sweep(spec);
}

Optimum maximize_bracketed(const std::function<double(double)>& objective, double lo, double hi,
                           double rel_tol, std::size_t prescan_points) {
  if (!(hi > lo)) throw SweepSpecError("bracket must satisfy lo < hi");
  if (prescan_points < 3) throw SweepSpecError("pre-scan needs at least 3 points");
  if (!(rel_tol > 0.0)) throw SweepSpecError("rel_tol must be > 0");

  Optimum opt;
  std::vector<double> fx(prescan_points);
  detail::parallel_for(prescan_points, [&](std::size_t i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(prescan_points - 1);
    fx[i] = objective(x);
  });
  for (std::size_t i = 0; i < prescan_points; ++i)
    opt.prescan.emplace_back(lo + (hi - lo) * static_cast<double>(i) / (prescan_points - 1), fx[i]);
  opt.evaluations = prescan_points;

  const auto best = static_cast<std::size_t>(std::max_element(fx.begin(), fx.end()) - fx.begin());
  if (best == 0 || best + 1 == prescan_points) {
    std::ostringstream os;
    os << "pre-scan over [" << lo << ", " << hi << "] peaks at the "
       << (best == 0 ? "lower" : "upper") << " end; widen or move the bracket";
    throw NoInteriorMax(os.str());
  }
  opt.argmax = opt.prescan[best].first;
  opt.value = fx[best];

  // Golden-section search on the two cells around the best scan point.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = opt.prescan[best - 1].first;
  double b = opt.prescan[best + 1].first;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  opt.evaluations += 2;
  auto consider = [&](double x, double f) {
    if (f > opt.value) {
      opt.value = f;
      opt.argmax = x;
    }
  };
  consider(c, fc);
  consider(d, fd);
  while (b - a > rel_tol * std::abs(0.5 * (a + b))) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
      consider(d, fd);
    }
    ++opt.evaluations;
  }
  return opt;
}

Optimum find_optimal_drive(const SystemParams& base, double delta_omega, double E_lo, double E_hi,
                           const IntegratorConfig& cfg, const SensingOptions& sensing) {
  if (!(E_lo > 0.0)) throw SweepSpecError("drive bracket must be positive");
  SweepSpec spec;
  spec.axis = SweepAxis::drive_E;
  spec.base = base;
  spec.cfg = cfg;
  spec.sensing = sensing;
  auto objective = [&](double E) {
    const SystemParams p = spec.params_at(E);
    return delta_xc_exact(p, delta_omega, spec.cfg_at(p), sensing).delta_xc;
  };
  return maximize_bracketed(objective, E_lo, E_hi);
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "axis,axis_value,delta_omega,delta_xc,amp_ref,amp_shifted,status\n";
  const char* axis = to_string(result.axis);
  char buf[256];
  for (const auto& r : result.rows) {
    if (r.ok()) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", axis, r.axis_value,
                    r.delta_omega, r.delta_xc, r.amp_ref, r.amp_shifted, r.status.c_str());
    } else {
      // Failed points leave the numeric columns empty so plots show gaps.
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,,,,%s\n", axis, r.axis_value, r.delta_omega,
                    r.status.c_str());
    }
    os << buf;
  }
}

}  // namespace optosense
