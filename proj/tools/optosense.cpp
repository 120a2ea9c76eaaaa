// Command-line front end: one subcommand per operation, CSV + run.json out.

#include <CLI11.hpp>
#include <iostream>

#include "optosense/io.hpp"

namespace {

using optosense::Command;

void add_common(CLI::App* sub, optosense::RunManifest& m) {
  sub->add_option("--config", m.config_path, "Parameter file (key = value) or a run.json sidecar")
      ->required();
  sub->add_option("--out", m.output_dir, "Output directory")->required();
  sub->add_option("--set", m.overrides, "Parameter override key=value (repeatable)");
  sub->add_option("--seed", m.seed, "Random seed");
  sub->add_flag("--force", m.force, "Overwrite existing output files");

  auto& o = m.options;
  sub->add_option("--t-end", o.t_end, "Start of the measurement window (1/kappa)");
  sub->add_option("--rel-tol", o.rel_tol, "Integrator relative tolerance");
  sub->add_option("--abs-tol", o.abs_tol, "Integrator absolute tolerance");
  sub->add_option("--max-step", o.max_step, "Integrator maximum step (1/kappa)");
  sub->add_option("--sample-interval", o.sample_interval, "Uniform output spacing (1/kappa)");
  sub->add_option("--sign", o.sign, "Direction of the frequency shift: raise | lower")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, optosense::ShiftSign>{{"raise", optosense::ShiftSign::raise},
                                                      {"lower", optosense::ShiftSign::lower}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optomechanical mass-sensing simulator"};
  app.require_subcommand(1);

  optosense::RunManifest m;
  auto& o = m.options;
  std::map<CLI::App*, Command> commands;

  auto make = [&](Command c, const char* help) {
    auto* sub = app.add_subcommand(optosense::to_string(c), help);
    add_common(sub, m);
    commands[sub] = c;
    return sub;
  };

  auto* simulate = make(Command::simulate, "Integrate the mean-field dynamics");
  simulate->add_option("--delta-omega", o.delta_omegas, "Mechanical frequency shift (kappa)");

  auto* ensemble = make(Command::ensemble, "Stochastic trajectory ensemble mean");
  ensemble->add_option("--delta-omega", o.delta_omegas, "Mechanical frequency shift (kappa)");
  ensemble->add_option("--n-traj", o.n_trajectories, "Number of trajectories");

  auto* delta = make(Command::delta, "Quadrature change Delta X_c for frequency shifts");
  delta->add_option("--delta-omega", o.delta_omegas, "Frequency shifts (kappa)")->required();
  delta->add_flag("--require-stabilized", o.require_stabilized,
                  "Fail when the amplitudes have not stabilized");

  for (auto [c, help] : {std::pair{Command::sweep_drive, "Sweep the drive amplitude E"},
                         std::pair{Command::sweep_coupling, "Sweep g_m at fixed E/Delta"},
                         std::pair{Command::sweep_sideband, "Sweep omega_m/kappa with Delta=omega_m"},
                         std::pair{Command::sweep_quality, "Sweep Q_m = omega_m/gamma_m"}}) {
    auto* sub = make(c, help);
    sub->add_option("--values", o.values, "Axis values (strictly increasing)")->required();
    sub->add_option("--delta-omega", o.delta_omegas,
                    c == Command::sweep_sideband ? "Relative shifts delta_omega/omega_m"
                                                 : "Frequency shifts (kappa)")
        ->required();
    if (c == Command::sweep_sideband) sub->add_option("--J", o.J_target, "Held coupling J/kappa");
    if (c == Command::sweep_coupling)
      sub->add_option("--constraint", o.coupling_constraint, "fix_E_over_Delta | fix_J")
          ->transform(CLI::CheckedTransformer(std::map<std::string, optosense::SweepConstraint>{
              {"fix_E_over_Delta", optosense::SweepConstraint::fix_E_over_Delta},
              {"fix_J", optosense::SweepConstraint::fix_J}}));
  }

  auto* optimize = make(Command::optimize_drive, "Golden-section search for the optimal drive");
  optimize->add_option("--delta-omega", o.delta_omegas, "Frequency shifts (kappa)")->required();
  optimize->add_option("--e-lo", o.E_lo, "Lower drive bracket (kappa)")->required();
  optimize->add_option("--e-hi", o.E_hi, "Upper drive bracket (kappa)")->required();

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, c] : commands)
    if (sub->parsed()) m.command = c;

  const auto outcome = optosense::run(m);
  if (outcome.exit_code != 0) {
    std::cerr << outcome.error_line << "\n";
    return outcome.exit_code;
  }
  for (const auto& f : outcome.files) std::cout << f.string() << "\n";
  return 0;
}
