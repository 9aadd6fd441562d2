// Command-line front end: simulate | steady | verify over one shared config
// file format.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "bsch/commands.hpp"
#include "bsch/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bulk-surface phase-field simulator"};
  app.set_version_flag("--version", std::string(bsch::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool fast = false;

  auto* sim = app.add_subcommand("simulate", "run the time integrator");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_dir, "output directory");

  auto* steady = app.add_subcommand("steady", "solve the stationary problem");
  steady->add_option("--config", config_path, "config file")->required();
  steady->add_option("--out", out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "run the verification checklist");
  verify->add_option("--config", config_path, "config file")->required();
  verify->add_flag("--fast", fast, "reduced resolutions and horizons");

  CLI11_PARSE(app, argc, argv);

  bsch::RunConfig cfg;
  try {
    cfg = bsch::parse_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "failure: CONFIG_ERROR: " << e.what() << "\n";
    return bsch::kExitConfig;
  }

  if (sim->parsed()) return bsch::cmd_simulate(cfg, out_dir);
  if (steady->parsed()) return bsch::cmd_steady(cfg, out_dir);
  return bsch::cmd_verify(cfg, fast);
}
