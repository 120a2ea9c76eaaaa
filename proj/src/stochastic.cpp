#include "optosense/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "optosense/errors.hpp"
#include "parallel.hpp"

namespace optosense {

void NoiseSpec::validate() const {
  if (!(n_th >= 0.0) || !std::isfinite(n_th)) throw NoiseSpecError("n_th must be finite and >= 0");
  if (n_trajectories < 1) throw NoiseSpecError("n_trajectories must be >= 1");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
    throw NoiseSpecError("noise_scale must be finite and >= 0");
}

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index)
    : state_(splitmix64(seed ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL))) {}

CounterRng::result_type CounterRng::operator()() {
  // splitmix64() adds the increment itself, so the n-th output depends only
  // on (key, n).
  const auto out = splitmix64(state_);
  state_ += 0x9e3779b97f4a7c15ULL;
  return out;
}

}  // namespace detail

namespace {

struct Grid {
  double h = 0.0;
  std::size_t n_steps = 0;
  std::vector<std::size_t> record_steps;
  std::vector<double> times;
  std::vector<TimeWindow> windows;
};

Grid make_grid(const SystemParams& params, const IntegratorConfig& cfg) {
  Grid g;
  std::vector<TimeWindow> windows;
  const auto ref = cfg.reference_window(params.delta);
  if (ref.begin >= 0.0 && cfg.reference_lag > 0.0) windows.push_back(ref);
  windows.push_back(cfg.measurement_window(params.delta));
  const double t_last = windows.back().end;

  g.n_steps = static_cast<std::size_t>(std::ceil(t_last / stochastic_step(cfg) - 1e-9));
  g.h = t_last / static_cast<double>(g.n_steps);
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::llround(cfg.sample_interval / g.h)));
  for (std::size_t k = 0; k <= g.n_steps; ++k) {
    const double t = k == g.n_steps ? t_last : static_cast<double>(k) * g.h;
    const bool in_window = std::any_of(windows.begin(), windows.end(), [&](const TimeWindow& w) {
      return t >= w.begin - 1e-12 && t <= w.end + 1e-12;
    });
    if (k % stride == 0 || in_window || k == g.n_steps) {
      g.record_steps.push_back(k);
      g.times.push_back(t);
    }
  }
  // Shrink the windows to the grid points they contain so peak extraction
  // on the stochastic grid sees them as densely sampled.
  for (auto w : windows) {
    const double lo = std::ceil(w.begin / g.h - 1e-9) * g.h;
    const double hi = std::min(t_last, std::floor(w.end / g.h + 1e-9) * g.h);
    g.windows.push_back({lo, hi});
  }
  return g;
}

/// Affine one-step map x -> A x + b equivalent to a classical RK4 step of
/// x' = M(t) x + d(t); shared by every path of an ensemble.
class AffineRk4 {
 public:
  AffineRk4(const SystemParams& params, double omega, double h)
      : params_(params), omega_(omega), h_(h), start_(augmented(0.0)) {}

  void step(std::size_t k, Eigen::Matrix4d& A, Eigen::Vector4d& b) {
    using M5 = Eigen::Matrix<double, 5, 5>;
    const double t = static_cast<double>(k) * h_;
    const M5 mid = augmented(t + 0.5 * h_);
    const M5 end = augmented(t + h_);
    const M5 I = M5::Identity();
    const M5 K1 = start_;
    const M5 K2 = mid * (I + 0.5 * h_ * K1);
    const M5 K3 = mid * (I + 0.5 * h_ * K2);
    const M5 K4 = end * (I + h_ * K3);
    const M5 phi = I + (h_ / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    A = phi.topLeftCorner<4, 4>();
    b = phi.topRightCorner<4, 1>();
    start_ = end;
  }

 private:
  Eigen::Matrix<double, 5, 5> augmented(double t) const {
    const auto c = detail::coefficients(t, omega_, params_);
    Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Zero();
    m.topLeftCorner<4, 4>() = detail::dynamics_matrix(c, params_);
    m.topRightCorner<4, 1>() = detail::drive_vector(c, params_);
    return m;
  }

  const SystemParams& params_;
  double omega_;
  double h_;
  Eigen::Matrix<double, 5, 5> start_;
};

struct Path {
  detail::CounterRng rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  MeanState x = MeanState::Zero();

  MeanState draw() { return {normal(rng), normal(rng), normal(rng), normal(rng)}; }
};

/// Advances paths [first, first + count) in lockstep and calls
/// on_sample(record_index, paths) at every recorded grid step.
template <class OnSample>
void run_paths(const SystemParams& params, double omega, const NoiseSpec& noise, const Grid& grid,
               std::size_t first, std::size_t count, OnSample&& on_sample) {
  std::vector<Path> paths;
  paths.reserve(count);
  for (std::size_t i = 0; i < count; ++i) paths.push_back({detail::CounterRng(noise.seed, first + i)});

  const double s = noise.noise_scale;
  const double mech_var = 2.0 * noise.n_th + 1.0;
  // Initial spread: vacuum cavity (variance 1/2), thermal mechanics.
  const MeanState init_sd = s * MeanState(std::sqrt(0.5), std::sqrt(0.5), std::sqrt(0.5 * mech_var),
                                          std::sqrt(0.5 * mech_var));
  // Increment spread: variance rate kappa for the cavity lines and
  // gamma_m (2 n_th + 1) for the mechanical ones.
  const double cav = std::sqrt(SystemParams::kappa * grid.h);
  const double mech = std::sqrt(params.gamma_m * mech_var * grid.h);
  const MeanState step_sd = s * MeanState(cav, cav, mech, mech);

  for (auto& p : paths) p.x = init_sd.cwiseProduct(p.draw());

  auto check = [&](std::size_t i, double t) {
    const double n = paths[i].x.norm();
    if (!std::isfinite(n) || n > kDivergenceNorm) {
      std::ostringstream os;
      os << "trajectory " << first + i << ": state norm " << n << " exceeds " << kDivergenceNorm
         << " at t=" << t;
      throw DivergenceError(os.str());
    }
  };

  AffineRk4 stepper(params, omega, grid.h);
  Eigen::Matrix4d A;
  Eigen::Vector4d b;
  std::size_t next_record = 0;
  for (std::size_t k = 0; k <= grid.n_steps; ++k) {
    if (next_record < grid.record_steps.size() && grid.record_steps[next_record] == k) {
      for (std::size_t i = 0; i < count; ++i) check(i, grid.times[next_record]);
      on_sample(next_record, paths);
      ++next_record;
    }
    if (k == grid.n_steps) break;
    stepper.step(k, A, b);
    for (auto& p : paths) {
      const MeanState xi = p.draw();
      p.x = A * p.x + b + step_sd.cwiseProduct(xi);
    }
  }
}

void prepare(const SystemParams& params, double omega, const NoiseSpec& noise,
             const IntegratorConfig& cfg) {
  params.validate();
  noise.validate();
  if (!(omega > 0.0)) throw ParameterError("omega_m_eff must be > 0");
  cfg.validate(params, omega);
}

struct ChunkStats {
  std::size_t count = 0;
  std::vector<MeanState> mean;
  std::vector<MeanState> m2;
};

}  // namespace

Trajectory sample_trajectory(const SystemParams& params, double omega_m_eff, const NoiseSpec& noise,
                             std::size_t index, const IntegratorConfig& cfg) {
  prepare(params, omega_m_eff, noise, cfg);
  if (index >= noise.n_trajectories)
    throw NoiseSpecError("trajectory index must be < n_trajectories");
  const Grid grid = make_grid(params, cfg);
  Trajectory traj;
  traj.params_hash = params.fingerprint();
  traj.period = 2.0 * M_PI / params.delta;
  traj.times = grid.times;
  traj.dense_windows = grid.windows;
  traj.states.reserve(grid.times.size());
  run_paths(params, omega_m_eff, noise, grid, index, 1,
            [&](std::size_t, const std::vector<Path>& paths) { traj.states.push_back(paths[0].x); });
  return traj;
}

EnsembleResult ensemble_mean(const SystemParams& params, double omega_m_eff,
                             const NoiseSpec& noise, const IntegratorConfig& cfg) {
  prepare(params, omega_m_eff, noise, cfg);
  if (noise.n_trajectories < 2) throw NoiseSpecError("ensemble_mean needs n_trajectories >= 2");
  const Grid grid = make_grid(params, cfg);
  const std::size_t n_samples = grid.times.size();

  // The chunk layout depends only on n_trajectories, never on the number of
  // threads, so the floating-point reduction order is fixed.
  const std::size_t n = noise.n_trajectories;
  const std::size_t chunk = std::max<std::size_t>(64, (n + 15) / 16);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<ChunkStats> stats(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t first = c * chunk;
    const std::size_t count = std::min(chunk, n - first);
    ChunkStats& out = stats[c];
    out.count = count;
    out.mean.assign(n_samples, MeanState::Zero());
    out.m2.assign(n_samples, MeanState::Zero());
    run_paths(params, omega_m_eff, noise, grid, first, count,
              [&](std::size_t r, const std::vector<Path>& paths) {
                MeanState sum = MeanState::Zero();
                for (const auto& p : paths) sum += p.x;
                const MeanState mean = sum / static_cast<double>(count);
                MeanState m2 = MeanState::Zero();
                for (const auto& p : paths) m2 += (p.x - mean).cwiseAbs2();
                out.mean[r] = mean;
                out.m2[r] = m2;
              });
  };

  detail::parallel_for(n_chunks, run_chunk);

  // Pairwise (Chan et al.) merge of the per-chunk moments, in chunk order.
  std::vector<MeanState> mean = stats[0].mean;
  std::vector<MeanState> m2 = stats[0].m2;
  double count = static_cast<double>(stats[0].count);
  for (std::size_t c = 1; c < n_chunks; ++c) {
    const double nb = static_cast<double>(stats[c].count);
    const double total = count + nb;
    for (std::size_t r = 0; r < n_samples; ++r) {
      const MeanState delta = stats[c].mean[r] - mean[r];
      mean[r] += delta * (nb / total);
      m2[r] += stats[c].m2[r] + delta.cwiseAbs2() * (count * nb / total);
    }
    count = total;
  }

  EnsembleResult result;
  result.n_trajectories = n;
  result.mean_trajectory.params_hash = params.fingerprint();
  result.mean_trajectory.period = 2.0 * M_PI / params.delta;
  result.mean_trajectory.times = grid.times;
  result.mean_trajectory.dense_windows = grid.windows;
  result.mean_trajectory.states = std::move(mean);
  result.stderr_trajectory.reserve(n_samples);
  const double nn = static_cast<double>(n);
  for (const auto& v : m2) result.stderr_trajectory.push_back((v / (nn - 1.0) / nn).cwiseSqrt());
  return result;
}

void write_ensemble_csv(std::ostream& os, const EnsembleResult& result) {
  os << "t,mean_x_c,se_x_c,mean_p_c,se_p_c,mean_x_m,se_x_m,mean_p_m,se_p_m\n";
  char buf[320];
  const auto& traj = result.mean_trajectory;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& m = traj.states[i];
    const auto& e = result.stderr_trajectory[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  traj.times[i], m[0], e[0], m[1], e[1], m[2], e[2], m[3], e[3]);
    os << buf;
  }
}

}  // namespace optosense
