#include <CLI11.hpp>

#include <iostream>

#include "cli/commands.hpp"

using pgflow::cli::Overrides;

namespace {

void add_output_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--out", o.out, "Trajectory (or data) file");
  cmd.add_option("--summary", o.summary, "JSON summary file");
  cmd.add_option("--svg", o.svg, "SVG line chart");
}

void add_flow_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--tmax", o.tmax, "Final simulated time");
  cmd.add_option("--rtol", o.rtol, "Relative tolerance");
  cmd.add_option("--atol", o.atol, "Absolute tolerance");
  cmd.add_option("--gamma", o.gamma, "Smoothed delta parameter");
  cmd.add_option("--rho", o.rho, "Restoration gain (number or 'gain')");
  cmd.add_option("--mu", o.mu, "Conditioner scale");
  cmd.add_option("--eps", o.eps, "Ridge or conditioner regularization");
  cmd.add_option("--projector", o.projector, "naive | ridge | recursive");
  cmd.add_option("--gain", o.gain, "identity | scalar[=q] | adaptive[=k] | pinv[=mu]");
  cmd.add_option("--x0", o.x0, "Initial state")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected gradient flows for equality-constrained minimization"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;

  auto* run = app.add_subcommand("run", "Integrate the flow described by a config file");
  run->add_option("--config", config, "YAML configuration")->required();
  add_output_flags(*run, o);
  add_flow_flags(*run, o);

  auto* check = app.add_subcommand("check", "Finite-difference check of the configured gradients");
  check->add_option("--config", config, "YAML configuration")->required();
  add_flow_flags(*check, o);

  auto* bench = app.add_subcommand("projection-bench", "Precision error of the projectors");
  add_output_flags(*bench, o);

  auto* ex1 = app.add_subcommand("example1", "Attraction-domain estimate");
  add_output_flags(*ex1, o);
  add_flow_flags(*ex1, o);

  auto* ex2 = app.add_subcommand("example2", "Essential-matrix estimate");
  add_output_flags(*ex2, o);
  add_flow_flags(*ex2, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pgflow::cli::kConfigError;
  }

  if (*run) return pgflow::cli::cmd_run(config, o, std::cout, std::cerr);
  if (*check) return pgflow::cli::cmd_check(config, o, std::cout, std::cerr);
  if (*bench) return pgflow::cli::cmd_projection_bench(o, std::cout, std::cerr);
  if (*ex1) return pgflow::cli::cmd_example1(o, std::cout, std::cerr);
  return pgflow::cli::cmd_example2(o, std::cout, std::cerr);
}
