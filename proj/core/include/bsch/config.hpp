#ifndef BSCH_CONFIG_HPP
#define BSCH_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bsch/mesh.hpp"
#include "bsch/potentials.hpp"
#include "bsch/stepper.hpp"

namespace bsch {

// Runtime configuration parsed from a plain-text `section.key = value` file.
// Unknown keys are rejected; every numeric range is validated before any
// allocation happens.
struct RunConfig {
  struct MeshCfg {
    std::string kind = "interval";  // interval | strip
    int n = 129;
    double length = 1.0;
    int nx = 32, ny = 17;
    double lx = 2.0, ly = 1.0;
  } mesh;

  ModelParams params;

  struct StepCfg {
    double dt = 1e-3;
    double t_end = 1.0;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    std::string linesearch = "backtracking";  // none | backtracking
    int clamp_k = 2;
    double dt_min = -1.0;
    double dt_max = -1.0;
  } step;

  struct InitCfg {
    std::string profile = "constant";  // constant | random | tanh | file
    std::uint64_t seed = 12345;
    double amplitude = 0.05;
    double tanh_center = -1.0;
    double tanh_width = -1.0;
    double xmod_amplitude = 0.0;
    std::string file;
  } init;

  struct OutputCfg {
    int every_steps = 1;
  } output;

  struct PotentialCfg {
    std::string kind = "logarithmic";  // logarithmic | polynomial
    double c = 3.0;
    double gamma = 1.0;  // polynomial kind only
  };
  PotentialCfg potential;
  PotentialCfg surface_potential;  // defaults to the bulk block
  bool surface_potential_set = false;

  struct SteadyCfg {
    double tol = 1e-12;
    std::string guess = "constant";  // constant | from-file
    std::string file;
    double radius = 1e-3;  // exponent-estimate perturbation radius
    int samples = 32;
  } steady;
};

RunConfig parse_config(const std::string& path);

// Effective configuration echo, one sorted `key = value` line per entry;
// written into the run manifest so a run is reproducible from it alone.
std::vector<std::string> effective_config_lines(const RunConfig& cfg);

Mesh build_mesh(const RunConfig& cfg);
PotentialSpec build_potential(const RunConfig::PotentialCfg& pc);
PotentialPair build_potential_pair(const RunConfig& cfg);
InitialProfile build_profile(const RunConfig& cfg);
StepConfig build_step_config(const RunConfig& cfg);

}  // namespace bsch

#endif
