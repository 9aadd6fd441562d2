#include "bsch/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace bsch {

namespace {

void check_interior(const PotentialSpec& spec, double r) {
  if (!spec.singular && spec.kind == PotentialSpec::Kind::polynomial) return;
  if (r < spec.domain_lo + kDomainGuard || r > spec.domain_hi - kDomainGuard) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "potential evaluated at r=%.17g outside (%g, %g)", r,
                  spec.domain_lo, spec.domain_hi);
    throw DomainError(buf);
  }
}

// Hermite cubic pieces for the tabulated kind.
struct Segment {
  double x0, h, y0, y1, m0, m1;
};

Segment segment_at(const PotentialSpec& spec, double r, int* index = nullptr) {
  const auto& xs = spec.tab_r;
  int lo = 0, hi = static_cast<int>(xs.size()) - 2;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (xs[mid] <= r)
      lo = mid;
    else
      hi = mid - 1;
  }
  if (index) *index = lo;
  Segment s;
  s.x0 = xs[lo];
  s.h = xs[lo + 1] - xs[lo];
  s.y0 = spec.tab_beta[lo];
  s.y1 = spec.tab_beta[lo + 1];
  s.m0 = spec.tab_slope[lo];
  s.m1 = spec.tab_slope[lo + 1];
  return s;
}

double hermite_eval(const Segment& s, double r) {
  const double t = (r - s.x0) / s.h;
  const double t2 = t * t, t3 = t2 * t;
  return s.y0 * (2 * t3 - 3 * t2 + 1) + s.h * s.m0 * (t3 - 2 * t2 + t) +
         s.y1 * (-2 * t3 + 3 * t2) + s.h * s.m1 * (t3 - t2);
}

double hermite_deriv(const Segment& s, double r) {
  const double t = (r - s.x0) / s.h;
  const double t2 = t * t;
  return (s.y0 * (6 * t2 - 6 * t) / s.h + s.m0 * (3 * t2 - 4 * t + 1) +
          s.y1 * (-6 * t2 + 6 * t) / s.h + s.m1 * (3 * t2 - 2 * t));
}

// Integral of the Hermite piece from its left node to r.
double hermite_integral(const Segment& s, double r) {
  const double t = (r - s.x0) / s.h;
  const double t2 = t * t, t3 = t2 * t, t4 = t2 * t2;
  const double H00 = 0.5 * t4 - t3 + t;
  const double H10 = 0.25 * t4 - (2.0 / 3.0) * t3 + 0.5 * t2;
  const double H01 = -0.5 * t4 + t3;
  const double H11 = 0.25 * t4 - t3 / 3.0;
  return s.h * (s.y0 * H00 + s.h * s.m0 * H10 + s.y1 * H01 + s.h * s.m1 * H11);
}

// Integral of the tabulated beta from 0 to r (beta_hat normalization).
double custom_beta_hat(const PotentialSpec& spec, double r) {
  auto cumulative = [&spec](double x) {
    // integral from tab_r.front() to x
    double acc = 0.0;
    const auto& xs = spec.tab_r;
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
      Segment sk{xs[k], xs[k + 1] - xs[k], spec.tab_beta[k], spec.tab_beta[k + 1],
                 spec.tab_slope[k], spec.tab_slope[k + 1]};
      if (xs[k + 1] <= x) {
        acc += hermite_integral(sk, xs[k + 1]);
      } else {
        acc += hermite_integral(sk, x);
        break;
      }
    }
    return acc;
  };
  return cumulative(r) - cumulative(0.0);
}

// Unguarded evaluation for the scalar resolvent: the bracket endpoints sit
// inside the DomainError band but are perfectly finite points of beta.
double beta_raw(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      r = std::clamp(r, -1.0 + 1e-16, 1.0 - 1e-16);
      return std::log((1.0 + r) / (1.0 - r));
    case PotentialSpec::Kind::polynomial:
      return r * r * r + spec.gamma * r;
    case PotentialSpec::Kind::custom:
      r = std::clamp(r, spec.domain_lo, spec.domain_hi);
      return hermite_eval(segment_at(spec, r), r);
  }
  return 0.0;
}

double beta_prime_raw(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      r = std::clamp(r, -1.0 + 1e-16, 1.0 - 1e-16);
      return 2.0 / (1.0 - r * r);
    case PotentialSpec::Kind::polynomial:
      return 3.0 * r * r + spec.gamma;
    case PotentialSpec::Kind::custom:
      r = std::clamp(r, spec.domain_lo, spec.domain_hi);
      return hermite_deriv(segment_at(spec, r), r);
  }
  return 0.0;
}

// Fritsch-Butland monotone slopes; reproduces linear data exactly.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  std::vector<double> d(n - 1), m(n);
  for (size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      m[i] = 3.0 * (h0 + h1) / ((2.0 * h1 + h0) / d[i - 1] + (h1 + 2.0 * h0) / d[i]);
    }
  }
  return m;
}

}  // namespace

PotentialSpec PotentialSpec::logarithmic(double c) {
  PotentialSpec s;
  s.kind = Kind::logarithmic;
  s.c = c;
  s.gamma = 2.0;           // beta'(r) = 2/(1-r^2) >= 2
  s.lipschitz_L = 2.0 * c; // pi(r) = -2cr
  s.c0 = 1.0;
  s.c1 = 1.0;
  s.c2 = 0.0;
  s.singular = true;
  return s;
}

PotentialSpec PotentialSpec::polynomial(double gamma) {
  PotentialSpec s;
  s.kind = Kind::polynomial;
  s.gamma = gamma;
  s.lipschitz_L = 1.0 + gamma;
  s.c0 = std::max(1.0, std::log(3.0 + gamma));
  s.c1 = 1.0;
  s.c2 = 0.0;
  s.domain_lo = -std::numeric_limits<double>::infinity();
  s.domain_hi = std::numeric_limits<double>::infinity();
  s.singular = false;
  return s;
}

PotentialSpec PotentialSpec::custom(std::vector<double> r, std::vector<double> beta,
                                    double pi_slope, bool singular) {
  if (r.size() < 2 || r.size() != beta.size())
    throw ConfigError("custom potential needs >= 2 matching (r, beta) samples");
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    if (!(r[i] < r[i + 1])) throw ConfigError("custom potential samples must increase in r");
  }
  PotentialSpec s;
  s.kind = Kind::custom;
  s.tab_r = std::move(r);
  s.tab_beta = std::move(beta);
  s.tab_slope = monotone_slopes(s.tab_r, s.tab_beta);
  s.pi_slope = pi_slope;
  s.lipschitz_L = std::abs(pi_slope);
  s.domain_lo = s.tab_r.front();
  s.domain_hi = s.tab_r.back();
  s.singular = singular;
  double gmin = std::numeric_limits<double>::infinity();
  for (double m : s.tab_slope) gmin = std::min(gmin, m);
  s.gamma = gmin;
  s.c0 = 2.0;
  return s;
}

double eval_beta(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      check_interior(spec, r);
      return std::log((1.0 + r) / (1.0 - r));
    case PotentialSpec::Kind::polynomial:
      return r * r * r + spec.gamma * r;
    case PotentialSpec::Kind::custom: {
      check_interior(spec, r);
      return hermite_eval(segment_at(spec, r), r);
    }
  }
  return 0.0;
}

double eval_beta_prime(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      check_interior(spec, r);
      return 2.0 / (1.0 - r * r);
    case PotentialSpec::Kind::polynomial:
      return 3.0 * r * r + spec.gamma;
    case PotentialSpec::Kind::custom:
      check_interior(spec, r);
      return hermite_deriv(segment_at(spec, r), r);
  }
  return 0.0;
}

double eval_beta_hat(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      check_interior(spec, r);
      return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r);
    case PotentialSpec::Kind::polynomial:
      return 0.25 * r * r * r * r + 0.5 * spec.gamma * r * r;
    case PotentialSpec::Kind::custom:
      check_interior(spec, r);
      return custom_beta_hat(spec, r);
  }
  return 0.0;
}

double eval_pi(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      return -2.0 * spec.c * r;
    case PotentialSpec::Kind::polynomial:
      return -(1.0 + spec.gamma) * r;
    case PotentialSpec::Kind::custom:
      return spec.pi_slope * r;
  }
  return 0.0;
}

double eval_pi_prime(const PotentialSpec& spec, double r) {
  (void)r;
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      return -2.0 * spec.c;
    case PotentialSpec::Kind::polynomial:
      return -(1.0 + spec.gamma);
    case PotentialSpec::Kind::custom:
      return spec.pi_slope;
  }
  return 0.0;
}

double eval_pi_hat(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Kind::logarithmic:
      return -spec.c * r * r;
    case PotentialSpec::Kind::polynomial:
      return -0.5 * (1.0 + spec.gamma) * r * r;
    case PotentialSpec::Kind::custom:
      return 0.5 * spec.pi_slope * r * r;
  }
  return 0.0;
}

double eval_F(const PotentialSpec& spec, double r) {
  return eval_beta_hat(spec, r) + eval_pi_hat(spec, r);
}

double eval_F_closed(const PotentialSpec& spec, double r) {
  if (spec.kind == PotentialSpec::Kind::logarithmic) {
    if (r < -1.0 || r > 1.0) throw DomainError("closed logarithmic F needs |r| <= 1");
    // (1 -+ r) log(1 -+ r) -> 0 at the endpoints.
    const double a = (1.0 + r) > 0.0 ? (1.0 + r) * std::log1p(r) : 0.0;
    const double b = (1.0 - r) > 0.0 ? (1.0 - r) * std::log1p(-r) : 0.0;
    return a + b - spec.c * r * r;
  }
  return eval_F(spec, r);
}

double yosida_resolvent(const PotentialSpec& spec, const YosidaConfig& cfg, double r) {
  if (!(cfg.epsilon > 0.0)) throw ConfigError("yosida epsilon must be > 0");
  const double eps = cfg.epsilon;
  // g(J) = J + eps beta(J) - r is strictly increasing; bracket then apply
  // Newton with bisection fallback.
  auto g = [&](double J) { return J + eps * beta_raw(spec, J) - r; };
  double lo, hi;
  if (std::isfinite(spec.domain_lo)) {
    lo = spec.domain_lo + 1e-14;
    hi = spec.domain_hi - 1e-14;
  } else {
    double R = std::max(1.0, std::abs(r));
    while (g(R) < 0.0 || g(-R) > 0.0) {
      R *= 2.0;
      if (R > 1e100) throw ConvergenceError("yosida resolvent bracket expansion failed");
    }
    lo = -R;
    hi = R;
  }
  const double glo = g(lo), ghi = g(hi);
  if (glo > 0.0) return lo;  // r beyond the reachable range: edge of the bracket
  if (ghi < 0.0) return hi;
  double J = std::clamp(r, lo, hi);
  double gj = g(J);
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    if (std::abs(gj) <= cfg.newton_tol * std::max(1.0, std::abs(r))) return J;
    if (gj > 0.0)
      hi = J;
    else
      lo = J;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(J)))
      return 0.5 * (lo + hi);
    const double dg = 1.0 + eps * beta_prime_raw(spec, J);
    double J_try = J - gj / dg;
    double g_try = 0.0;
    bool ok = J_try > lo && J_try < hi;
    if (ok) {
      g_try = g(J_try);
      // Near the domain ends the slope explodes and Newton crawls; require
      // the step to halve the residual, otherwise bisect the bracket.
      ok = std::abs(g_try) <= 0.5 * std::abs(gj);
    }
    if (!ok) {
      J_try = 0.5 * (lo + hi);
      g_try = g(J_try);
    }
    J = J_try;
    gj = g_try;
  }
  throw ConvergenceError("yosida resolvent Newton did not converge");
}

double yosida_beta(const PotentialSpec& spec, const YosidaConfig& cfg, double r) {
  const double J = yosida_resolvent(spec, cfg, r);
  return (r - J) / cfg.epsilon;
}

double yosida_beta_prime(const PotentialSpec& spec, const YosidaConfig& cfg, double r) {
  const double J = yosida_resolvent(spec, cfg, r);
  const double bp = beta_prime_raw(spec, J);
  return bp / (1.0 + cfg.epsilon * bp);
}

double yosida_beta_hat(const PotentialSpec& spec, const YosidaConfig& cfg, double r) {
  const double J = yosida_resolvent(spec, cfg, r);
  const double be = (r - J) / cfg.epsilon;
  double hat;
  if (spec.kind == PotentialSpec::Kind::logarithmic) {
    const double Jc = std::clamp(J, -1.0, 1.0);
    const double a = (1.0 + Jc) > 0.0 ? (1.0 + Jc) * std::log1p(Jc) : 0.0;
    const double b = (1.0 - Jc) > 0.0 ? (1.0 - Jc) * std::log1p(-Jc) : 0.0;
    hat = a + b;
  } else if (spec.kind == PotentialSpec::Kind::custom) {
    hat = eval_beta_hat(
        spec, std::clamp(J, spec.domain_lo + 2e-12, spec.domain_hi - 2e-12));
  } else {
    hat = eval_beta_hat(spec, J);
  }
  return hat + 0.5 * cfg.epsilon * be * be;
}

double truncate_hk(int k, double r) {
  if (k < 2) throw ConfigError("truncation level k must be >= 2");
  const double bound = 1.0 - 1.0 / static_cast<double>(k);
  return std::clamp(r, -bound, bound);
}

double double_well_minima(const PotentialSpec& spec) {
  // F'' = beta' + pi' must be negative somewhere for a double well.
  const double lo = std::isfinite(spec.domain_lo) ? spec.domain_lo + 1e-9 : -2.0;
  const double hi = std::isfinite(spec.domain_hi) ? spec.domain_hi - 1e-9 : 2.0;
  const int ns = 2001;
  bool nonconvex = false;
  for (int i = 0; i < ns; ++i) {
    const double r = lo + (hi - lo) * i / (ns - 1);
    if (eval_beta_prime(spec, r) + eval_pi_prime(spec, r) < 0.0) {
      nonconvex = true;
      break;
    }
  }
  if (!nonconvex) throw NotDoubleWell("F'' >= 0 on the sampled domain; no interior double well");

  // Positive root of h(r) = beta(r) + pi(r) on (0, hi]; h < 0 just right of 0
  // and h > 0 near the singular end (or for large r in the polynomial case).
  auto h = [&](double r) { return eval_beta(spec, r) + eval_pi(spec, r); };
  double a = 0.0, b = 0.0;
  const int scan = 4096;
  double prev_r = hi / scan, prev_h = h(prev_r);
  if (prev_h > 0.0) throw NotDoubleWell("F' has no negative lobe on (0,1)");
  for (int i = 2; i <= scan; ++i) {
    const double r = hi * i / scan;
    const double hr = h(r);
    if (prev_h < 0.0 && hr >= 0.0) {
      a = prev_r;
      b = r;
      break;
    }
    prev_r = r;
    prev_h = hr;
  }
  if (b == 0.0) {
    if (!std::isfinite(spec.domain_hi)) throw NotDoubleWell("no sign change of F' located");
    b = hi;  // root sits at the domain end within the guard
    a = prev_r;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (h(mid) < 0.0)
      a = mid;
    else
      b = mid;
    if (b - a < 1e-14) break;
  }
  return 0.5 * (a + b);
}

void AssumptionReport::require() const {
  char buf[160];
  if (!a1.ok) {
    std::snprintf(buf, sizeof(buf),
                  "(A1) failed at r=%.12g: monotonicity/gamma/convexity of beta' "
                  "(lhs=%.6g, rhs=%.6g)",
                  a1.witness_r, a1.lhs, a1.rhs);
    throw AssumptionViolation(buf);
  }
  if (!a2.ok) {
    std::snprintf(buf, sizeof(buf),
                  "(A2) failed at r=%.12g: |beta(r)|=%.6g > c1 |beta_G(r)| + c2 = %.6g",
                  a2.witness_r, a2.lhs, a2.rhs);
    throw AssumptionViolation(buf);
  }
  if (!a3.ok) {
    std::snprintf(buf, sizeof(buf), "(A3) failed at r=%.12g: |pi'(r)|=%.6g > L=%.6g", a3.witness_r,
                  a3.lhs, a3.rhs);
    throw AssumptionViolation(buf);
  }
  if (!a5.ok) {
    std::snprintf(buf, sizeof(buf),
                  "(A5) failed at r=%.12g: |beta'(r)|=%.6g > exp(c0 |beta(r)| + c0)=%.6g",
                  a5.witness_r, a5.lhs, a5.rhs);
    throw AssumptionViolation(buf);
  }
}

AssumptionReport validate_assumptions(const PotentialSpec& bulk, const PotentialSpec& surf,
                                      double m0, int samples) {
  if (samples < 100) throw ConfigError("assumption validation needs >= 100 samples");
  if (!(m0 > -1.0 && m0 < 1.0)) throw ConfigError("assumption validation needs m0 in (-1,1)");
  AssumptionReport rep;

  // Shared sample grid over the common admissible interior.
  const double lo = std::max({bulk.domain_lo, surf.domain_lo, -1.0}) + 1e-6;
  const double hi = std::min({bulk.domain_hi, surf.domain_hi, 1.0}) - 1e-6;
  std::vector<double> grid(samples);
  for (int i = 0; i < samples; ++i) grid[i] = lo + (hi - lo) * i / (samples - 1);

  auto check_a1 = [&](const PotentialSpec& s, AssumptionCheck& out) {
    double prev = eval_beta(s, grid[0]);
    for (int i = 0; i < samples; ++i) {
      const double b = eval_beta(s, grid[i]);
      const double bp = eval_beta_prime(s, grid[i]);
      if (i > 0 && !(b > prev)) {
        out = {false, grid[i], b, prev};
        return;
      }
      if (bp < s.gamma - 1e-10) {
        out = {false, grid[i], bp, s.gamma};
        return;
      }
      prev = b;
    }
    if (std::abs(eval_beta(s, 0.0)) > 1e-12 || std::abs(eval_beta_hat(s, 0.0)) > 1e-12) {
      out = {false, 0.0, eval_beta(s, 0.0), 0.0};
      return;
    }
    // convexity of beta' by second differences, relative to the local scale
    for (int i = 1; i + 1 < samples; ++i) {
      const double d2 = eval_beta_prime(s, grid[i - 1]) - 2.0 * eval_beta_prime(s, grid[i]) +
                        eval_beta_prime(s, grid[i + 1]);
      if (d2 < -1e-8 * std::max(1.0, std::abs(eval_beta_prime(s, grid[i])))) {
        out = {false, grid[i], d2, 0.0};
        return;
      }
    }
  };
  check_a1(bulk, rep.a1);
  if (rep.a1.ok) check_a1(surf, rep.a1);

  for (int i = 0; i < samples; ++i) {
    const double b = std::abs(eval_beta(bulk, grid[i]));
    const double bg = std::abs(eval_beta(surf, grid[i]));
    const double rhs = bulk.c1 * bg + bulk.c2;
    if (b > rhs + 1e-10) {
      rep.a2 = {false, grid[i], b, rhs};
      break;
    }
  }

  const double L = std::max(bulk.lipschitz_L, surf.lipschitz_L);
  for (int i = 0; i < samples; ++i) {
    const double pb = std::abs(eval_pi_prime(bulk, grid[i]));
    const double pg = std::abs(eval_pi_prime(surf, grid[i]));
    if (pb > L + 1e-12) {
      rep.a3 = {false, grid[i], pb, L};
      break;
    }
    if (pg > L + 1e-12) {
      rep.a3 = {false, grid[i], pg, L};
      break;
    }
  }

  for (int i = 0; i < samples; ++i) {
    const double bp = std::abs(eval_beta_prime(bulk, grid[i]));
    const double rhs = std::exp(bulk.c0 * std::abs(eval_beta(bulk, grid[i])) + bulk.c0);
    if (bp > rhs * (1.0 + 1e-12)) {
      rep.a5 = {false, grid[i], bp, rhs};
      break;
    }
  }

  // Empirical constants witnessing beta(r)(r - m0) >= c4 |beta(r)| - c5.
  rep.c4_empirical = 0.5 * (1.0 - std::abs(m0));
  double c5 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double b = eval_beta(bulk, grid[i]);
    const double slack = rep.c4_empirical * std::abs(b) - b * (grid[i] - m0);
    c5 = std::max(c5, slack);
    const double bg = eval_beta(surf, grid[i]);
    const double slack_g = rep.c4_empirical * std::abs(bg) - bg * (grid[i] - m0);
    c5 = std::max(c5, slack_g);
  }
  rep.c5_empirical = c5;
  return rep;
}

PotentialEval::PotentialEval(PotentialSpec spec, double yosida_eps, YosidaConfig ycfg)
    : spec_(std::move(spec)), eps_(yosida_eps), ycfg_(ycfg) {
  ycfg_.epsilon = eps_ > 0.0 ? eps_ : 1.0;
}

double PotentialEval::beta(double r) const {
  if (eps_ > 0.0) return yosida_beta(spec_, ycfg_, r);
  return eval_beta(spec_, r);
}

double PotentialEval::beta_prime(double r) const {
  if (eps_ > 0.0) return yosida_beta_prime(spec_, ycfg_, r);
  return eval_beta_prime(spec_, r);
}

double PotentialEval::beta_hat(double r) const {
  if (eps_ > 0.0) return yosida_beta_hat(spec_, ycfg_, r);
  return eval_beta_hat(spec_, r);
}

}  // namespace bsch
