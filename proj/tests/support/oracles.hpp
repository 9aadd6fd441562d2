// Test-side oracles, built from first principles and independent of the
// library's assembly and solver paths.

#ifndef BSCH_TESTS_ORACLES_HPP
#define BSCH_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

// Scalar bisection on a bracketing interval.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  if (flo > 0.0) std::swap(lo, hi);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Hand-built 1D uniform-grid machinery on (0, length) with n nodes:
// trapezoid bulk weights, endpoint boundary weights 1, linear-element
// stiffness. Kept deliberately plain.
struct Dense1D {
  int n;
  double h;
  Eigen::VectorXd x;
  Eigen::VectorXd wb;   // bulk quadrature weights
  Eigen::VectorXd bg;   // boundary weight folded onto endpoint nodes
  Eigen::VectorXd M;    // wb + bg
  Eigen::MatrixXd K;    // Dirichlet integral

  explicit Dense1D(int n_, double length = 1.0) : n(n_) {
    h = length / (n - 1);
    x.resize(n);
    wb.resize(n);
    for (int i = 0; i < n; ++i) {
      x[i] = i * h;
      wb[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
    bg = Eigen::VectorXd::Zero(n);
    bg[0] = 1.0;
    bg[n - 1] = 1.0;
    M = wb + bg;
    K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
      K(i, i) += 1.0 / h;
      K(i + 1, i + 1) += 1.0 / h;
      K(i, i + 1) -= 1.0 / h;
      K(i + 1, i) -= 1.0 / h;
    }
  }
};

// One fully implicit backward-Euler step (no splitting) for the coupled 1D
// system, solved by dense Newton. beta/pi passed as callables so the oracle
// shares no evaluation code with the increment under test.
struct ImplicitStep1D {
  std::function<double(double)> beta, beta_prime, pi, pi_prime;
  double kappa = 0.0;

  Eigen::VectorXd advance(const Dense1D& g, const Eigen::VectorXd& un, double dt,
                          int max_iter = 100, double tol = 1e-13) const {
    const int n = g.n;
    Eigen::VectorXd u = un;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    // initial mu from the variational identity at un
    for (int i = 0; i < n; ++i)
      mu[i] = ((g.K * un)[i] + g.wb[i] * (beta(un[i]) + pi(un[i])) +
               g.bg[i] * (beta(un[i]) + pi(un[i]))) /
              g.M[i];
    for (int it = 0; it < max_iter; ++it) {
      Eigen::VectorXd r1 = g.M.cwiseProduct(u - un) + dt * (g.K * mu) +
                           dt * kappa * g.bg.cwiseProduct(mu);
      Eigen::VectorXd r2 = g.M.cwiseProduct(mu) - g.K * u;
      for (int i = 0; i < n; ++i)
        r2[i] -= (g.wb[i] + g.bg[i]) * (beta(u[i]) + pi(u[i]));
      const double err = std::max(r1.cwiseQuotient(g.M).cwiseAbs().maxCoeff(),
                                  r2.cwiseQuotient(g.M).cwiseAbs().maxCoeff());
      if (err < tol) return u;
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
      J.topLeftCorner(n, n) = g.M.asDiagonal();
      J.topRightCorner(n, n) = dt * g.K;
      for (int i = 0; i < n; ++i) J(i, n + i) += dt * kappa * g.bg[i];
      J.bottomLeftCorner(n, n) = -g.K;
      for (int i = 0; i < n; ++i)
        J(n + i, i) -= (g.wb[i] + g.bg[i]) * (beta_prime(u[i]) + pi_prime(u[i]));
      J.bottomRightCorner(n, n) = g.M.asDiagonal();
      Eigen::VectorXd rhs(2 * n);
      rhs.head(n) = -r1;
      rhs.tail(n) = -r2;
      const Eigen::VectorXd delta = J.fullPivLu().solve(rhs);
      u += delta.head(n);
      mu += delta.tail(n);
    }
    throw std::runtime_error("dense implicit oracle did not converge");
  }
};

}  // namespace oracles

#endif
