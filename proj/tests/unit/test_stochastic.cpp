#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "optosense/errors.hpp"
#include "optosense/stochastic.hpp"

using namespace optosense;

namespace {

IntegratorConfig short_run(const SystemParams& p, double t_end) {
  auto cfg = IntegratorConfig::defaults_for(p);
  cfg.t_end = t_end;
  cfg.reference_lag = 0.5 * t_end;
  return cfg;
}

}  // namespace

TEST_CASE("counter rng is keyed by seed and index") {
  detail::CounterRng a(1, 2), b(1, 2), c(1, 3), d(2, 2);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  CHECK(a() != x);
}

TEST_CASE("zero noise reduces a path to the mean-field solution") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 100.0);
  NoiseSpec noise{p.n_th, 3, 1, 0.0};
  const auto path = sample_trajectory(p, p.omega_m, noise, 0, cfg);
  const auto exact = integrate_means_at(p, p.omega_m, cfg, path.times);
  double scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    scale = std::max(scale, exact.states[i].norm());
    worst = std::max(worst, (path.states[i] - exact.states[i]).norm());
  }
  MESSAGE("max deviation " << worst << " against scale " << scale);
  CHECK(worst < 1e-6 * scale);
  CHECK(path.times.front() == 0.0);
  CHECK(path.states.front() == MeanState::Zero());
}

TEST_CASE("paths are reproducible per (seed, index)") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 20.0);
  const auto noise = NoiseSpec::for_params(p, 42, 4);
  const auto a = sample_trajectory(p, p.omega_m, noise, 1, cfg);
  const auto b = sample_trajectory(p, p.omega_m, noise, 1, cfg);
  const auto c = sample_trajectory(p, p.omega_m, noise, 2, cfg);
  CHECK(a.states == b.states);
  CHECK(a.states != c.states);
  CHECK_THROWS_AS(sample_trajectory(p, p.omega_m, noise, 4, cfg), NoiseSpecError);
}

TEST_CASE("ensemble of two is the average of its paths") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 20.0);
  const auto noise = NoiseSpec::for_params(p, 9, 2);
  const auto ens = ensemble_mean(p, p.omega_m, noise, cfg);
  const auto a = sample_trajectory(p, p.omega_m, noise, 0, cfg);
  const auto b = sample_trajectory(p, p.omega_m, noise, 1, cfg);
  REQUIRE(ens.mean_trajectory.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(ens.mean_trajectory.states[i] == (a.states[i] + b.states[i]) / 2.0);
    for (int q = 0; q < 4; ++q) CHECK(ens.stderr_trajectory[i][q] >= 0.0);
  }

  NoiseSpec quiet = noise;
  quiet.noise_scale = 0.0;
  const auto zero = ensemble_mean(p, p.omega_m, quiet, cfg);
  const auto single = sample_trajectory(p, p.omega_m, quiet, 0, cfg);
  CHECK(zero.mean_trajectory.states == single.states);
  for (const auto& se : zero.stderr_trajectory) CHECK(se == MeanState::Zero());
}

TEST_CASE("ensemble is a pure function of its inputs") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 10.0);
  const auto noise = NoiseSpec::for_params(p, 5, 130);
  const auto a = ensemble_mean(p, p.omega_m, noise, cfg);
  const auto b = ensemble_mean(p, p.omega_m, noise, cfg);
  CHECK(a.mean_trajectory.states == b.mean_trajectory.states);
  CHECK(a.stderr_trajectory == b.stderr_trajectory);
}

TEST_CASE("decoupled spread matches the stationary Ornstein-Uhlenbeck variance") {
  auto p = oracle::baseline();
  p.g_m = 0.0;
  p.n_th = 100.0;
  p.gamma_m = 0.05;
  const auto cfg = short_run(p, 30.0);
  const std::size_t n = 800;
  const auto ens = ensemble_mean(p, p.omega_m, NoiseSpec::for_params(p, 17, n), cfg);
  const auto& se = ens.stderr_trajectory.back();
  const double var_cav = se[kXc] * se[kXc] * n;
  const double var_mech = se[kXm] * se[kXm] * n;
  MESSAGE("cavity variance " << var_cav << ", mechanical variance " << var_mech);
  // Sample variance of 800 Gaussians: relative standard deviation 5%.
  CHECK(var_cav == doctest::Approx(0.5).epsilon(0.2));
  CHECK(var_mech == doctest::Approx(p.n_th + 0.5).epsilon(0.2));
}

TEST_CASE("standard error shrinks as one over root N") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 10.0);
  const auto small = ensemble_mean(p, p.omega_m, NoiseSpec::for_params(p, 1, 1000), cfg);
  const auto large = ensemble_mean(p, p.omega_m, NoiseSpec::for_params(p, 2, 4000), cfg);
  double s = 0.0, l = 0.0;
  const std::size_t n = small.stderr_trajectory.size();
  for (std::size_t i = n / 2; i < n; ++i) {
    s += small.stderr_trajectory[i][kXc];
    l += large.stderr_trajectory[i][kXc];
  }
  const double ratio = l / s;
  MESSAGE("stderr ratio N=4000 / N=1000: " << ratio);
  CHECK(ratio >= 0.4);
  CHECK(ratio <= 0.6);
}

TEST_CASE("noise specification errors") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 10.0);
  CHECK_THROWS_AS(ensemble_mean(p, p.omega_m, NoiseSpec::for_params(p, 0, 1), cfg),
                  NoiseSpecError);
  NoiseSpec bad{-1.0, 0, 4, 1.0};
  CHECK_THROWS_AS(bad.validate(), NoiseSpecError);
}

TEST_CASE("divergence reports the failing path") {
  auto p = oracle::baseline();
  p.delta = p.omega_m;
  p.g_m = 1e-3;
  auto cfg = short_run(p, 600.0);
  try {
    ensemble_mean(p, p.omega_m, NoiseSpec::for_params(p, 0, 2), cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("trajectory ") != std::string::npos);
  }
}

TEST_CASE("ensemble csv") {
  const auto p = oracle::baseline();
  const auto cfg = short_run(p, 1.0);
  const auto ens = ensemble_mean(p, p.omega_m, NoiseSpec::for_params(p, 0, 2), cfg);
  std::ostringstream os;
  write_ensemble_csv(os, ens);
  const auto text = os.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "t,mean_x_c,se_x_c,mean_p_c,se_p_c,mean_x_m,se_x_m,mean_p_m,se_p_m");
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) ==
        ens.mean_trajectory.size() + 1);
}
