#ifndef BSCH_DIAGNOSTICS_HPP
#define BSCH_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "bsch/mesh.hpp"
#include "bsch/operators.hpp"
#include "bsch/stepper.hpp"

namespace bsch {

// Per-step scalars. dissipation is the squared dual norm of the discrete time
// derivative (0 on the first record, where no previous state exists);
// dist_to_steady is NaN when no reference state is supplied.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double total_mass_raw = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double boundary_mu_integral = 0.0;
  double separation = 0.0;
  double mu_mean = 0.0;
  double dist_to_steady = 0.0;
};

// Free energy: 1/2 int |grad u|^2 + chi/2 int_G |grad_G u|^2 + int F(u)
// + int_G F_G(u). chi is baked into the operator set.
double energy(const Mesh& mesh, const OperatorSet& ops, const PhasePair& u,
              const PotentialPair& pots);

DiagnosticsRecord record(const State& state, const Mesh& mesh, const OperatorSet& ops,
                         const PotentialPair& pots, const ModelParams& params,
                         const State* prev = nullptr, const PhasePair* steady_ref = nullptr);

struct EnergyIdentityResult {
  bool applicable = true;      // false for permeable-wall runs (kappa > 0)
  double max_defect = 0.0;     // over step pairs from the second one on
  double first_step_defect = 0.0;  // reported separately, not asserted
};

// Max over steps of |dE/dt + dissipation| / max(1, |E|); scales O(dt).
EnergyIdentityResult check_energy_identity(const std::vector<DiagnosticsRecord>& series,
                                           double kappa);

struct DecayFit {
  double theta_from_rate = 0.0;  // |slope| / (1 + 2 |slope|), in (0, 1/2)
  double prefactor = 0.0;        // exp(intercept) of the log-log fit
  double t_lo = 0.0, t_hi = 0.0;
  double rms_residual = 0.0;
  bool clipped = false;          // rate too steep for a power law (theta -> 1/2)
};

// Least-squares fit of log dist_to_steady against log(1+t) over the monotone
// tail (default: the trailing half of the trajectory). Throws NotDecaying when
// the tail is not monotone beyond tolerance.
DecayFit fit_decay(const std::vector<DiagnosticsRecord>& series);

// Columns: t,mass,total_mass_raw,energy,dissipation,boundary_mu_integral,
// separation,mu_mean,dist_to_steady
void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& series);
void write_decay_fit(const std::string& path, const DecayFit& fit);

}  // namespace bsch

#endif
