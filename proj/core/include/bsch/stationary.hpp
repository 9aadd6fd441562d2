#ifndef BSCH_STATIONARY_HPP
#define BSCH_STATIONARY_HPP

#include <cstdint>

#include "bsch/mesh.hpp"
#include "bsch/operators.hpp"
#include "bsch/stepper.hpp"

namespace bsch {

struct SteadyState {
  PhasePair u;
  double mu_s = 0.0;          // constant chemical potential
  double residual_norm = 0.0; // discrete H-norm of the converged residual
  double delta_sep = 0.0;     // 1 - max|u|
};

// Solves the mass-constrained stationary problem
//   -lap u + beta(u) + pi(u) = mu_s          in Omega,
//   dnu u - chi lap_G u + beta_G(u) + pi_G(u) = mu_s   on Gamma,
//   m(u) = m0,
// by Newton on (u, mu_s) with the constraint row bordering the Jacobian;
// mu_s is exactly the multiplier of the mass constraint. The converged mu_s
// also satisfies the combined-average identity within 10*tol.
SteadyState solve_steady(const Mesh& mesh, const OperatorSet& ops, const ModelParams& params,
                         const PotentialPair& pots, const PhasePair& guess, double tol);

// (1/(|Omega|+|Gamma|)) [ int (beta+pi)(u) + int_G (beta_G+pi_G)(u_G) ].
double mu_s_from_average(const Mesh& mesh, const PhasePair& u, const PotentialPair& pots);

struct SeparationReport {
  double delta_sep = 0.0;       // measured 1 - max|u|
  double mu_abs = 0.0;          // |mu_s|
  double delta_threshold = 0.0; // largest delta with beta+pi-|mu_s| >= 1 on [1-delta, 1)
                                // and the mirrored bound on (-1, -1+delta]
  double mesh_tol = 0.0;
  bool satisfied = false;       // delta_sep >= delta_threshold - mesh_tol
};

// Certifies the computed state against the threshold construction: the
// smallest admissible band around +-1 that the potential wall excludes.
SeparationReport steady_separation_report(const Mesh& mesh, const SteadyState& ss,
                                          const PotentialPair& pots, const ModelParams& params);

struct LojasiewiczFit {
  double theta_hat = 0.0;    // in (0, 1/2]
  double fit_residual = 0.0; // rms log residual of the binding direction
  double binding_slope = 0.0;
  int directions_used = 0;
};

// Empirical exponent of the gradient-energy inequality near a steady state:
// samples zero-mean perturbations at geometrically shrinking radii, fits
// log ||P grad E|| against log |E - E_s| per direction, and keeps the binding
// (max-slope) direction. theta_hat = 1 - slope, clipped to (0, 1/2].
LojasiewiczFit estimate_lojasiewicz(const Mesh& mesh, const OperatorSet& ops,
                                    const SteadyState& ss, const PotentialPair& pots,
                                    const ModelParams& params, int n_samples, double radius,
                                    std::uint64_t seed = 7);

}  // namespace bsch

#endif
