#ifndef BSCH_POTENTIALS_HPP
#define BSCH_POTENTIALS_HPP

#include <string>
#include <vector>

#include "bsch/errors.hpp"

namespace bsch {

// Guard band around the pure states: evaluating a singular nonlinearity at
// |r| > 1 - kDomainGuard raises DomainError instead of returning huge values.
inline constexpr double kDomainGuard = 1e-12;

// A potential F = beta_hat + pi_hat split into a convex singular part (with
// derivative beta, monotone increasing) and a smooth Lipschitz perturbation
// (with derivative pi).
//
//   Logarithmic(c): beta(r) = ln((1+r)/(1-r)), pi(r) = -2 c r on (-1,1).
//   Polynomial:     beta(r) = r^3 + gamma r, pi(r) = -(1+gamma) r on R,
//                   so that F(r) = (r^2-1)^2/4 - 1/4.
//   Custom:         beta tabulated on [r_0, r_k], monotone cubic interpolation,
//                   pi(r) = pi_slope * r. Lets tests inject adversarial shapes.
struct PotentialSpec {
  enum class Kind { logarithmic, polynomial, custom };

  Kind kind = Kind::logarithmic;
  double c = 3.0;           // logarithmic well depth
  double gamma = 2.0;       // lower bound of beta'
  double lipschitz_L = 6.0; // bound on |pi'|
  double c0 = 1.0;          // growth constant: |beta'| <= exp(c0 |beta| + c0)
  double c1 = 1.0;          // bulk/surface domination: |beta| <= c1 |beta_G| + c2
  double c2 = 0.0;
  double domain_lo = -1.0;  // open domain of beta
  double domain_hi = 1.0;
  bool singular = true;     // beta blows up at the domain ends

  // Custom kind only.
  std::vector<double> tab_r;
  std::vector<double> tab_beta;
  std::vector<double> tab_slope;  // interpolant node derivatives
  double pi_slope = 0.0;

  static PotentialSpec logarithmic(double c);
  static PotentialSpec polynomial(double gamma = 1.0);
  // Samples must be strictly increasing in r; beta values are interpolated by
  // a monotone cubic. pi(r) = pi_slope * r.
  static PotentialSpec custom(std::vector<double> r, std::vector<double> beta, double pi_slope,
                              bool singular = false);
};

struct YosidaConfig {
  double epsilon = 1e-2;
  double newton_tol = 1e-14;
  int newton_max_iter = 200;
};

// --- pointwise evaluation -------------------------------------------------

// F(r) = beta_hat(r) + pi_hat(r). DomainError when r leaves the admissible
// interior; the _closed variant extends to the closed interval for singular
// kinds (the logarithmic F has finite limits at +-1).
double eval_F(const PotentialSpec& spec, double r);
double eval_F_closed(const PotentialSpec& spec, double r);

double eval_beta(const PotentialSpec& spec, double r);
double eval_beta_prime(const PotentialSpec& spec, double r);
double eval_beta_hat(const PotentialSpec& spec, double r);

double eval_pi(const PotentialSpec& spec, double r);
double eval_pi_prime(const PotentialSpec& spec, double r);
double eval_pi_hat(const PotentialSpec& spec, double r);

// Resolvent J solving J + eps beta(J) = r, and the Yosida regularization
// beta_eps(r) = (r - J)/eps. Defined for every real r.
double yosida_resolvent(const PotentialSpec& spec, const YosidaConfig& cfg, double r);
double yosida_beta(const PotentialSpec& spec, const YosidaConfig& cfg, double r);
double yosida_beta_prime(const PotentialSpec& spec, const YosidaConfig& cfg, double r);
// Moreau envelope of beta_hat: beta_hat(J) + eps/2 * beta_eps(r)^2.
double yosida_beta_hat(const PotentialSpec& spec, const YosidaConfig& cfg, double r);

// Lipschitz truncation onto [-1+1/k, 1-1/k]; identity inside. k >= 2.
double truncate_hk(int k, double r);

// Local minima +-r_star of a nonconvex F, from beta(r) = -pi(r) on (0, hi).
// Throws NotDoubleWell when F'' >= 0 on the sampled domain.
double double_well_minima(const PotentialSpec& spec);

// --- assumption validation ------------------------------------------------

struct AssumptionCheck {
  bool ok = true;
  double witness_r = 0.0;   // sample point violating the inequality
  double lhs = 0.0, rhs = 0.0;
};

struct AssumptionReport {
  AssumptionCheck a1;  // monotonicity, gamma bound, convex beta', normalization
  AssumptionCheck a2;  // |beta| <= c1 |beta_G| + c2
  AssumptionCheck a3;  // |pi'| <= L, |pi_G'| <= L
  AssumptionCheck a5;  // |beta'| <= exp(c0 |beta| + c0)
  double c4_empirical = 0.0;  // beta(r)(r - m0) >= c4 |beta(r)| - c5 on the grid
  double c5_empirical = 0.0;
  bool pass() const { return a1.ok && a2.ok && a3.ok && a5.ok; }
  // Throws AssumptionViolation naming the first failing inequality.
  void require() const;
};

AssumptionReport validate_assumptions(const PotentialSpec& bulk, const PotentialSpec& surf,
                                      double m0, int samples);

// --- solver-facing evaluator ----------------------------------------------

// Bundles a spec with the optional Yosida regularization scale used by the
// time stepper and the energy. eps == 0 evaluates the exact (possibly
// singular) nonlinearity with domain guards; eps > 0 evaluates the globally
// defined regularization.
class PotentialEval {
 public:
  PotentialEval() = default;
  PotentialEval(PotentialSpec spec, double yosida_eps, YosidaConfig ycfg = {});

  double beta(double r) const;
  double beta_prime(double r) const;
  double beta_hat(double r) const;
  double pi(double r) const { return eval_pi(spec_, r); }
  double pi_prime(double r) const { return eval_pi_prime(spec_, r); }
  double pi_hat(double r) const { return eval_pi_hat(spec_, r); }
  double F(double r) const { return beta_hat(r) + pi_hat(r); }

  bool regularized() const { return eps_ > 0.0; }
  bool singular() const { return spec_.singular && eps_ == 0.0; }
  const PotentialSpec& spec() const { return spec_; }
  double yosida_eps() const { return eps_; }

 private:
  PotentialSpec spec_;
  double eps_ = 0.0;
  YosidaConfig ycfg_;
};

}  // namespace bsch

#endif
