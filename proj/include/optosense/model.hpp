#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>

namespace optosense {

/// Physical parameters of the driven cavity + mechanical resonator.
///
/// Every rate is expressed in units of the cavity decay rate kappa, which is
/// therefore 1 internally. `kappa_hz` only matters at the I/O boundary: it is
/// kappa/(2 pi) in Hz and converts the normalized rates to physical ones.
struct SystemParams {
  double kappa_hz = 0.0;  // 0 means "not given"; disables physical-unit reports
  double g_m = 0.0;       // single-photon optomechanical coupling
  double delta = 0.0;     // drive detuning omega_c - omega_L (red detuned: > 0)
  double omega_m = 0.0;   // mechanical resonance frequency
  double gamma_m = 0.0;   // mechanical damping
  double drive_E = 0.0;   // CW drive amplitude
  double n_th = 0.0;      // thermal occupation of the mechanical bath

  static constexpr double kappa = 1.0;

  /// Effective coupling J = g_m E / Delta, the small parameter of the
  /// perturbative picture.
  double coupling_J() const { return g_m * drive_E / delta; }

  /// Throws ParameterError when any invariant is violated.
  void validate() const;

  /// Non-empty when J/kappa >= 0.1, i.e. outside the weak-coupling regime.
  std::optional<std::string> validity_warning() const;

  /// Stable 64-bit fingerprint of all fields (bitwise), used to tag
  /// trajectories with the parameter set that produced them.
  std::uint64_t fingerprint() const;

  bool operator==(const SystemParams&) const = default;
};

/// Threshold on J/kappa above which validity_warning() fires.
inline constexpr double kWeakCouplingLimit = 0.1;

/// The coherent drive amplitude E(t) = (iE/Delta)(1 - exp(i Delta t)).
using ComplexEnvelope = std::complex<double>;

/// Offsets that the free (drive + detuning) evolution adds to the cavity
/// quadratures. Only needed to reconstruct lab-frame quadratures.
struct FrameOffset {
  double x_off = 0.0;
  double p_off = 0.0;
};

ComplexEnvelope drive_envelope(double t, const SystemParams& params);

FrameOffset frame_offset(double t, const SystemParams& params);

namespace detail {

/// sin/cos of omega*t with the rounding error of the product folded back in.
/// For omega*t ~ 1e5 the naive product loses ~1e-11 of phase.
struct Phase {
  double sin;
  double cos;
  double one_minus_cos;  // 1 - cos, without cancellation near zero
};

Phase accurate_phase(double omega, double t);

}  // namespace detail

}  // namespace optosense
