#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "optosense/dynamics.hpp"

namespace optosense {

/// Markovian white-noise baths: vacuum for the cavity, thermal at n_th for
/// the mechanics.
struct NoiseSpec {
  double n_th = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_trajectories = 1;
  // Multiplies every noise amplitude (initial spread and increments).
  // 0 turns the SDE into the mean-field ODE.
  double noise_scale = 1.0;

  static NoiseSpec for_params(const SystemParams& params, std::uint64_t seed, std::size_t n) {
    return {params.n_th, seed, n, 1.0};
  }
  void validate() const;
};

struct EnsembleResult {
  Trajectory mean_trajectory;
  std::vector<MeanState> stderr_trajectory;  // standard error of the mean per sample
  std::size_t n_trajectories = 0;
};

/// Nominal fixed step of the stochastic integrator. The actual grid step is
/// shrunk slightly so the measurement window end lies on the grid.
inline double stochastic_step(const IntegratorConfig& cfg) { return cfg.max_step / 4.0; }

/// One path of the Langevin equations. The drift is advanced with classical
/// RK4 and the additive noise increments are added after each step. Sampled
/// every step inside the dense windows and about every sample_interval
/// elsewhere. Identical (seed, index) gives a bit-identical path.
Trajectory sample_trajectory(const SystemParams& params, double omega_m_eff, const NoiseSpec& noise,
                             std::size_t index, const IntegratorConfig& cfg);

/// Per-sample mean and standard error over noise.n_trajectories paths.
/// The result is independent of the number of worker threads.
EnsembleResult ensemble_mean(const SystemParams& params, double omega_m_eff,
                             const NoiseSpec& noise, const IntegratorConfig& cfg);

/// `t,mean_x_c,se_x_c,mean_p_c,se_p_c,mean_x_m,se_x_m,mean_p_m,se_p_m`
void write_ensemble_csv(std::ostream& os, const EnsembleResult& result);

namespace detail {

/// Counter-based stream: the n-th draw is a SplitMix64 mix of key + n * phi,
/// with the key itself derived from (seed, index).
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t seed, std::uint64_t index);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace detail

}  // namespace optosense
