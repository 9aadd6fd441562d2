#ifndef BSCH_STEPPER_HPP
#define BSCH_STEPPER_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "bsch/mesh.hpp"
#include "bsch/operators.hpp"
#include "bsch/potentials.hpp"

namespace bsch {

// Physical and scheme constants. sigma weighs the boundary diffusion of the
// chemical potential, chi the boundary gradient energy, kappa the wall
// permeability (kappa = 0: non-permeable, total mass conserved). viscous_eps
// adds the eps * du/dt term to the chemical potential; yosida_eps replaces the
// singular beta by its Yosida regularization (0 = exact beta with safeguards).
struct ModelParams {
  double sigma = 1.0;
  double chi = 1.0;
  double kappa = 0.0;
  double viscous_eps = 0.0;
  double yosida_eps = 0.0;
  double m0 = 0.0;

  void validate() const;
};

struct StepConfig {
  double dt = 1e-3;
  double newton_tol = 1e-12;      // max-norm of the mass-scaled residual
  int newton_max_iter = 50;
  enum class Linesearch { none, backtracking };
  Linesearch linesearch = Linesearch::backtracking;
  int clamp_k = 2;                // minimum truncation level of the safeguard
  double dt_min = -1.0;           // <= 0: dt / 2^20
  double dt_max = -1.0;           // <= 0: dt
};

struct State {
  double t = 0.0;
  PhasePair u;
  PhasePair mu;
  long step_count = 0;
};

// Bulk and surface nonlinearities sharing one Yosida scale; the surface
// resolvent runs at c1 * eps where c1 is the bulk/surface domination constant.
struct PotentialPair {
  PotentialEval bulk;
  PotentialEval surf;
};

PotentialPair make_potential_pair(const PotentialSpec& bulk, const PotentialSpec& surf,
                                  double yosida_eps);

struct InitialProfile {
  enum class Kind { constant, random, tanh, file };
  Kind kind = Kind::constant;
  double amplitude = 0.05;
  std::uint64_t seed = 12345;
  double tanh_center = -1.0;   // < 0: domain midpoint
  double tanh_width = -1.0;    // <= 0: 4 * mesh spacing
  double xmod_amplitude = 0.0; // strip only: + a cos(2 pi x / lx) on top of tanh
  std::string file;
};

// Variational chemical potential of a given state:
//   (mu, z)_H = a_chi(u, z) + (beta(u) + pi(u), z)_Omega + (..._Gamma, z)_Gamma.
PhasePair chemical_potential(const Mesh& mesh, const OperatorSet& ops, const PotentialPair& pots,
                             const PhasePair& u);

// State at t = 0 with the generalized mean shifted onto m0 exactly and the
// chemical potential initialized variationally.
State initial_state(const Mesh& mesh, const OperatorSet& ops, const PotentialPair& pots,
                    const ModelParams& params, const InitialProfile& profile);

// One backward-Euler step of the coupled system with convex splitting: the
// convex part (gradients, beta) implicit, the concave perturbation pi taken
// at the previous state. Newton iterates are safeguarded by truncation onto
// [-1+1/k, 1-1/k] with k grown from the current separation, and globalized by
// residual backtracking. Postconditions: total mass evolves exactly by
// -kappa dt int_Gamma mu; the discrete energy does not increase (up to
// 1e-10 relative); max|u| < 1 for singular potentials.
State step(const State& state, const Mesh& mesh, const OperatorSet& ops,
           const ModelParams& params, const PotentialPair& pots, const StepConfig& cfg);

using StepCallback = std::function<void(const State& current, const State& previous)>;

// Repeated stepping to t_end with the callback after each accepted step.
// Halves dt on NewtonDivergence down to dt_min, doubles after 10 consecutive
// successes up to dt_max.
State run(State state, const Mesh& mesh, const OperatorSet& ops, const ModelParams& params,
          const PotentialPair& pots, const StepConfig& cfg, double t_end,
          const StepCallback& callback = nullptr);

}  // namespace bsch

#endif
