#include "geofeas/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace geofeas;
  CLI::App app{"Motion feasibility for multi-agent systems on Lie groups"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_dir;
  std::string method;
  double h = 0.0;
  int steps = 0;
  bool no_constraints = false;
  int jobs = 1;
  auto* sim = app.add_subcommand("simulate", "integrate the constrained dynamics and write CSV output");
  sim->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  sim->add_option("--config", configs, "scenario config (repeat for a sweep)")->required();
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--method", method, "euler or lie_euler")->check(CLI::IsMember({"euler", "lie_euler"}));
  sim->add_option("--h", h, "step size in seconds")->check(CLI::PositiveNumber);
  sim->add_option("--steps", steps, "number of steps")->check(CLI::PositiveNumber);
  sim->add_flag("--no-constraints", no_constraints, "drop the constraint forces (lambda = 0)");
  sim->add_option("--jobs", jobs, "parallel runs when several configs are given")->check(CLI::PositiveNumber);

  std::string kin_config;
  bool json = false;
  auto* kin = app.add_subcommand("kinfeas", "admissible velocities at the configured base point");
  kin->add_option("--config", kin_config, "scenario config")->required();
  kin->add_flag("--json", json, "machine-readable output");

  std::string traj_dir;
  auto* ext = app.add_subcommand("extract-control", "recompute controls.csv for a finished run");
  ext->add_option("--traj", traj_dir, "run directory written by simulate")->required();

  CLI11_PARSE(app, argc, argv);

  if (*sim) {
    cli::SimulateOverrides ov;
    if (!method.empty()) ov.method = parse_integrator_method(method);
    if (sim->count("--h")) ov.h = h;
    if (sim->count("--steps")) ov.steps = steps;
    ov.no_constraints = no_constraints;
    return cli::cmd_simulate(configs, out_dir, ov, jobs, std::cout, std::cerr);
  }
  if (*kin) return cli::cmd_kinfeas(kin_config, json, std::cout, std::cerr);
  return cli::cmd_extract_control(traj_dir, std::cout, std::cerr);
}
