#include "optosense/model.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "optosense/errors.hpp"

namespace optosense {

void SystemParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
  };
  require(std::isfinite(g_m) && std::isfinite(delta) && std::isfinite(omega_m) &&
              std::isfinite(gamma_m) && std::isfinite(drive_E) && std::isfinite(n_th) &&
              std::isfinite(kappa_hz),
          "parameters must be finite");
  require(kappa_hz >= 0.0, "kappa_hz must be >= 0 (0 = unspecified)");
  require(gamma_m > 0.0, "gamma_m must be > 0");
  require(omega_m > 0.0, "omega_m must be > 0");
  require(drive_E >= 0.0, "drive_E must be >= 0");
  require(g_m >= 0.0, "g_m must be >= 0");
  require(n_th >= 0.0, "n_th must be >= 0");
  require(delta > 0.0, "delta must be > 0 (only red-detuned drives are stable)");
}

std::optional<std::string> SystemParams::validity_warning() const {
  const double J = coupling_J();
  if (J / kappa < kWeakCouplingLimit) return std::nullopt;
  std::ostringstream os;
  os << "J/kappa = " << J << " >= " << kWeakCouplingLimit
     << ": outside the weak-coupling regime of the linearized dynamics";
  return os.str();
}

std::uint64_t SystemParams::fingerprint() const {
  // FNV-1a over the raw bits of each field.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : {kappa_hz, g_m, delta, omega_m, gamma_m, drive_E, n_th}) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace detail {

Phase accurate_phase(double omega, double t) {
  const double p = omega * t;
  const double err = std::fma(omega, t, -p);
  const double s = std::sin(p);
  const double c = std::cos(p);
  const double half = std::sin(0.5 * p);
  return {s + c * err, c - s * err, 2.0 * half * half + s * err};
}

}  // namespace detail

ComplexEnvelope drive_envelope(double t, const SystemParams& params) {
  // (iE/D)(1 - e^{iDt}) = (E/D) [sin(Dt) + i (1 - cos(Dt))]
  const double scale = params.drive_E / params.delta;
  const auto ph = detail::accurate_phase(params.delta, t);
  return {scale * ph.sin, scale * ph.one_minus_cos};
}

FrameOffset frame_offset(double t, const SystemParams& params) {
  // z = e^{-iDt} E(t) = (E/D) [sin(Dt) - i (1 - cos(Dt))]
  // x_off = (z + z*)/sqrt2 = sqrt2 Re z,  p_off = -i(z - z*)/sqrt2 = sqrt2 Im z
  const double scale = params.drive_E / params.delta;
  const auto ph = detail::accurate_phase(params.delta, t);
  return {M_SQRT2 * scale * ph.sin, -M_SQRT2 * scale * ph.one_minus_cos};
}

}  // namespace optosense
