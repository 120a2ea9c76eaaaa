#pragma once

// Reference values computed independently of the library: extended
// precision, written from the scalar equations rather than the matrix form.

#include <array>
#include <cmath>
#include <complex>

#include "optosense/model.hpp"

namespace oracle {

using ld = long double;
inline constexpr ld kSqrt2 = 1.414213562373095048801688724209698079L;

// E(t) = (iE/D)(1 - e^{iDt}) evaluated with complex long double arithmetic.
inline std::complex<ld> envelope(ld t, const optosense::SystemParams& p) {
  const std::complex<ld> i{0.0L, 1.0L};
  const ld E = p.drive_E, D = p.delta;
  return i * (E / D) * (1.0L - std::exp(i * D * t));
}

// Frame offsets straight from the conjugate combinations.
inline std::array<ld, 2> offsets(ld t, const optosense::SystemParams& p) {
  const std::complex<ld> i{0.0L, 1.0L};
  const ld D = p.delta;
  const auto e = envelope(t, p);
  const auto a = std::exp(-i * D * t) * e;
  const auto b = std::exp(i * D * t) * std::conj(e);
  const auto x = (a + b) / kSqrt2;
  const auto q = -i * (a - b) / kSqrt2;
  return {x.real(), q.real()};
}

// Right-hand side of the four mean-field equations, one line each.
inline std::array<ld, 4> rhs(ld t, const std::array<ld, 4>& s, ld omega,
                             const optosense::SystemParams& p) {
  const auto e = envelope(t, p);
  const ld re = e.real(), im = e.imag(), g = p.g_m, gm = p.gamma_m;
  const ld c = std::cos(omega * t), sn = std::sin(omega * t);
  const ld xc = s[0], pc = s[1], xm = s[2], pm = s[3];
  return {
      -xc - 2 * g * im * (c * xm + sn * pm) - kSqrt2 * re,
      -pc + 2 * g * re * (c * xm + sn * pm) - kSqrt2 * im,
      -gm * xm - 2 * g * sn * (re * xc + im * pc) - g * sn * std::norm(e),
      -gm * pm + 2 * g * c * (re * xc + im * pc) + g * c * std::norm(e),
  };
}

// Cavity quadratures with the mechanics decoupled (g_m = 0), from zero:
//   x' = -x - sqrt2 (E/D) sin(Dt),   p' = -p - sqrt2 (E/D) (1 - cos(Dt)).
inline ld free_cavity_x(ld t, const optosense::SystemParams& p) {
  const ld D = p.delta, c = kSqrt2 * p.drive_E / D;
  const ld A = -c / (1 + D * D), B = c * D / (1 + D * D);
  return A * std::sin(D * t) + B * std::cos(D * t) - B * std::exp(-t);
}

inline ld free_cavity_p(ld t, const optosense::SystemParams& p) {
  const ld D = p.delta, c = kSqrt2 * p.drive_E / D;
  // Constant part -c, oscillating part driven by +c cos(Dt).
  const ld A = c * D / (1 + D * D), B = c / (1 + D * D);
  const ld particular0 = B;  // value of the oscillating solution at t = 0
  return -c + A * std::sin(D * t) + B * std::cos(D * t) + (c - particular0) * std::exp(-t);
}

inline optosense::SystemParams baseline() {
  optosense::SystemParams p;
  p.kappa_hz = 1e6;
  p.g_m = 1e-6;
  p.delta = 100.01;
  p.omega_m = 100.0;
  p.gamma_m = 1e-4;
  p.drive_E = 5e6;
  p.n_th = 6e4;
  return p;
}

}  // namespace oracle
