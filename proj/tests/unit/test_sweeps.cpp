#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "optosense/errors.hpp"
#include "optosense/sweeps.hpp"

using namespace optosense;

namespace {

IntegratorConfig quick(const SystemParams& p) {
  auto cfg = IntegratorConfig::defaults_for(p);
  cfg.t_end = 60.0;
  cfg.reference_lag = 20.0;
  return cfg;
}

}  // namespace

TEST_CASE("golden section finds a known optimum") {
  const double c = 3.7;
  const auto opt = maximize_bracketed([&](double x) { return -(x - c) * (x - c); }, 0.0, 10.0);
  CHECK(opt.argmax == doctest::Approx(c).epsilon(1e-3));
  CHECK(opt.prescan.size() == 8);
  CHECK(opt.argmax >= 0.0);
  CHECK(opt.argmax <= 10.0);
  double best_scan = -1e300;
  for (const auto& [x, f] : opt.prescan) best_scan = std::max(best_scan, f);
  CHECK(opt.value >= best_scan);
}

TEST_CASE("monotone objective has no interior maximum") {
  CHECK_THROWS_AS(maximize_bracketed([](double x) { return x; }, 0.0, 1.0), NoInteriorMax);
  CHECK_THROWS_AS(maximize_bracketed([](double x) { return -x; }, 0.0, 1.0), NoInteriorMax);
  CHECK_THROWS_AS(maximize_bracketed([](double x) { return x; }, 1.0, 0.0), SweepSpecError);
}

TEST_CASE("parameters per sweep point") {
  const auto base = oracle::baseline();
  SweepSpec spec;
  spec.base = base;
  spec.axis = SweepAxis::sideband;
  spec.constraint = SweepConstraint::fix_J;
  spec.J_target = 0.06;
  const auto p = spec.params_at(200.0);
  CHECK(p.omega_m == 200.0);
  CHECK(p.delta == 200.0);
  CHECK(p.coupling_J() == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(spec.shift_at(p, 1e-3) == doctest::Approx(0.2));

  spec.axis = SweepAxis::g_m;
  spec.constraint = SweepConstraint::fix_E_over_Delta;
  const auto g = spec.params_at(2e-6);
  CHECK(g.drive_E / g.delta == doctest::Approx(base.drive_E / base.delta).epsilon(1e-15));

  spec.axis = SweepAxis::quality;
  spec.constraint = SweepConstraint::none;
  CHECK(spec.params_at(1e5).gamma_m == doctest::Approx(1e-3));

  spec.values = {2.0, 1.0};
  spec.delta_omegas = {0.001};
  CHECK_THROWS_AS(spec.validate(), SweepSpecError);
}

TEST_CASE("single point sweep equals a direct call") {
  const auto p = oracle::baseline();
  const auto cfg = quick(p);
  const auto sweep = sweep_drive(p, {p.drive_E}, {0.002}, cfg);
  const auto direct = delta_xc_exact(p, 0.002, cfg);
  REQUIRE(sweep.rows.size() == 1);
  CHECK(sweep.rows[0].delta_xc == direct.delta_xc);
  CHECK(sweep.rows[0].amp_ref == direct.amp_ref);
  CHECK(sweep.rows[0].status == "unstabilized");

  const auto q = sweep_quality(p, {p.omega_m / p.gamma_m}, {0.002}, cfg);
  CHECK(q.rows[0].delta_xc == direct.delta_xc);
  const auto g = sweep_coupling(p, {p.g_m}, {0.002}, cfg);
  CHECK(g.rows[0].delta_xc == direct.delta_xc);
}

TEST_CASE("sweep rows: order, zero shift, determinism, isolation") {
  const auto p = oracle::baseline();
  const auto cfg = quick(p);
  const std::vector<double> E{2e6, 4e6, 6e6};
  const std::vector<double> shifts{0.0, 0.001, 0.004};
  const auto a = sweep_drive(p, E, shifts, cfg);
  const auto b = sweep_drive(p, E, shifts, cfg);
  REQUIRE(a.rows.size() == 9);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].axis_value == E[i / 3]);
    CHECK(a.rows[i].delta_omega == shifts[i % 3]);
    CHECK(a.rows[i].delta_xc >= 0.0);
    CHECK(a.rows[i].delta_xc == b.rows[i].delta_xc);
    if (shifts[i % 3] == 0.0) CHECK(a.rows[i].delta_xc == 0.0);
  }
  const auto alone = sweep_drive(p, {E[1]}, {shifts[2]}, cfg);
  CHECK(alone.rows[0].delta_xc == a.rows[5].delta_xc);
  CHECK(a.curve(0.001).size() == 3);
}

TEST_CASE("failing points are flagged and the sweep continues") {
  const auto p = oracle::baseline();
  const auto cfg = quick(p);
  const auto r = sweep_drive(p, {1e6, 2e6}, {0.001, 150.0}, cfg);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].ok());
  CHECK(r.rows[1].status == "error:DomainError");
  CHECK_FALSE(r.rows[1].ok());

  std::ostringstream os;
  write_sweep_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "axis,axis_value,delta_omega,delta_xc,amp_ref,amp_shifted,status");
  std::getline(in, line);
  CHECK(line.rfind("drive_E,1000000,0.001,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "drive_E,1000000,150,,,,error:DomainError");
}

TEST_CASE("sideband sweep with zero relative shift") {
  const auto p = oracle::baseline();
  auto cfg = quick(p);
  cfg.max_step = 0.0;
  const auto r = sweep_sideband(p, {50.0, 100.0}, {0.0, 1e-6}, 0.06, cfg);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].delta_xc == 0.0);
  CHECK(r.rows[2].delta_xc == 0.0);
  CHECK(r.rows[1].delta_omega == doctest::Approx(50e-6));
  CHECK(r.rows[3].delta_omega == doctest::Approx(100e-6));
}

TEST_CASE("optimal drive sits inside the bracket and scales with the coupling") {
  const auto p = oracle::baseline();
  const auto cfg = IntegratorConfig::defaults_for(p);
  const auto opt = find_optimal_drive(p, 0.001, 3e6, 9e6, cfg);
  CHECK(opt.argmax > 3e6);
  CHECK(opt.argmax < 9e6);
  MESSAGE("E_opt " << opt.argmax << " after " << opt.evaluations << " evaluations");

  // Dense-grid oracle: the refined optimum lies within one grid cell of the
  // best of 200 points, and is at least as good.
  const auto grid_cfg = cfg;
  double best_E = 0.0, best = -1.0;
  std::vector<double> E;
  for (int i = 0; i < 200; ++i) E.push_back(3e6 + 6e6 * i / 199.0);
  const auto sweep = sweep_drive(p, E, {0.001}, grid_cfg);
  for (const auto& r : sweep.rows)
    if (r.delta_xc > best) {
      best = r.delta_xc;
      best_E = r.axis_value;
    }
  CHECK(std::abs(opt.argmax - best_E) <= 6e6 / 199.0);
  CHECK(opt.value >= best * (1.0 - 1e-6));

  auto q = p;
  q.g_m = p.g_m / 10.0;
  const auto scaled = find_optimal_drive(q, 0.001, 3e7, 9e7, cfg);
  CHECK(scaled.argmax == doctest::Approx(10.0 * opt.argmax).epsilon(2e-3));
}
