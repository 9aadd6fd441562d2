#include "bsch/stationary.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <random>
#include <vector>

#include "bsch/diagnostics.hpp"

namespace bsch {

namespace {

int steady_clamp_level(double separation, int k_min = 2) {
  if (separation <= 2e-9)
    throw NonAdmissibleIterate("steady iterate too close to the pure states");
  const double k = std::ceil(2.0 / separation);
  return static_cast<int>(std::min(1e9, std::max(static_cast<double>(k_min), k)));
}

}  // namespace

double mu_s_from_average(const Mesh& mesh, const PhasePair& u, const PotentialPair& pots) {
  double acc = 0.0;
  for (int i = 0; i < mesh.num_bulk(); ++i)
    acc += mesh.bulk_weights[i] * (pots.bulk.beta(u.bulk[i]) + pots.bulk.pi(u.bulk[i]));
  for (int b = 0; b < mesh.num_boundary(); ++b)
    acc += mesh.boundary_weights[b] * (pots.surf.beta(u.boundary[b]) + pots.surf.pi(u.boundary[b]));
  return acc / (mesh.omega_measure + mesh.gamma_measure);
}

SteadyState solve_steady(const Mesh& mesh, const OperatorSet& ops, const ModelParams& params,
                         const PotentialPair& pots, const PhasePair& guess, double tol) {
  params.validate();
  if (!(tol > 0.0)) throw ConfigError("steady.tol must be > 0");
  const int n = mesh.num_bulk();
  const Eigen::VectorXd& M = ops.lumped_mass;
  const Eigen::VectorXd& wb = mesh.bulk_weights;
  const Eigen::VectorXd& bg = ops.boundary_lumped;
  const double total_weight = mesh.omega_measure + mesh.gamma_measure;
  const bool singular = pots.bulk.singular();

  Eigen::VectorXd u = guess.bulk;
  // The mass constraint fixes the mean; shift the guess onto it up front.
  u.array() += params.m0 - M.dot(u) / total_weight;
  if (singular && u.cwiseAbs().maxCoeff() >= 1.0 - 1e-12)
    throw NonAdmissibleIterate("steady guess touches the pure states after the mean shift");
  double mu_s = mu_s_from_average(mesh, pair_from_bulk(mesh, u), pots);

  auto residual = [&](const Eigen::VectorXd& v, double m, Eigen::VectorXd& rs, double& rm) {
    rs = ops.a_chi * v - m * M;
    for (int i = 0; i < n; ++i) rs[i] += wb[i] * (pots.bulk.beta(v[i]) + pots.bulk.pi(v[i]));
    for (int i = 0; i < n; ++i) {
      if (bg[i] != 0.0) rs[i] += bg[i] * (pots.surf.beta(v[i]) + pots.surf.pi(v[i]));
    }
    rm = M.dot(v) / total_weight - params.m0;
  };
  auto err_norm = [&](const Eigen::VectorXd& rs, double rm) {
    // H-norm of the strong-form field residual plus the constraint defect
    const Eigen::VectorXd field = rs.cwiseQuotient(M);
    return std::sqrt(M.dot(field.cwiseProduct(field))) + std::abs(rm);
  };

  Eigen::VectorXd rs(n);
  double rm = 0.0;
  residual(u, mu_s, rs, rm);
  double err = err_norm(rs, rm);

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  int clamped_iters = 0;
  const int max_iter = 80;
  for (int iter = 0; iter < max_iter && err > tol; ++iter) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(ops.a_chi.nonZeros() + 3 * n + 2);
    for (int k = 0; k < ops.a_chi.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(ops.a_chi, k); it; ++it)
        trips.emplace_back(it.row(), it.col(), it.value());
    }
    for (int i = 0; i < n; ++i) {
      double diag = wb[i] * (pots.bulk.beta_prime(u[i]) + pots.bulk.pi_prime(u[i]));
      if (bg[i] != 0.0) diag += bg[i] * (pots.surf.beta_prime(u[i]) + pots.surf.pi_prime(u[i]));
      trips.emplace_back(i, i, diag);
      trips.emplace_back(i, n, -M[i]);            // d rs / d mu_s
      trips.emplace_back(n, i, M[i] / total_weight);  // constraint row
    }
    Eigen::SparseMatrix<double> J(n + 1, n + 1);
    J.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -rs;
    rhs[n] = -rm;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw NewtonDivergence("steady Jacobian factorization failed");
    const Eigen::VectorXd delta = lu.solve(rhs);

    const int k_clamp =
        singular ? steady_clamp_level(1.0 - u.cwiseAbs().maxCoeff()) : 0;
    double s = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 14; ++bt) {
      Eigen::VectorXd u_try = u + s * delta.head(n);
      bool clamp_hit = false;
      if (singular) {
        const double bound = 1.0 - 1.0 / static_cast<double>(k_clamp);
        for (int i = 0; i < n; ++i) {
          if (u_try[i] > bound) {
            u_try[i] = bound;
            clamp_hit = true;
          } else if (u_try[i] < -bound) {
            u_try[i] = -bound;
            clamp_hit = true;
          }
        }
      }
      const double mu_try = mu_s + s * delta[n];
      Eigen::VectorXd ts(n);
      double tm = 0.0;
      residual(u_try, mu_try, ts, tm);
      const double err_try = err_norm(ts, tm);
      if (err_try <= (1.0 - 1e-4 * s) * err) {
        if (clamp_hit) ++clamped_iters;
        u = u_try;
        mu_s = mu_try;
        rs = ts;
        rm = tm;
        err = err_try;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      if (clamped_iters > max_iter / 2)
        throw NonAdmissibleIterate("steady Newton clamped too often to make progress");
      throw NewtonDivergence("steady Newton backtracking stalled");
    }
  }
  if (err > tol) throw NewtonDivergence("steady Newton did not reach the tolerance");

  SteadyState ss;
  ss.u = pair_from_bulk(mesh, u);
  ss.mu_s = mu_s;
  ss.residual_norm = err;
  ss.delta_sep = 1.0 - u.cwiseAbs().maxCoeff();
  return ss;
}

SeparationReport steady_separation_report(const Mesh& mesh, const SteadyState& ss,
                                          const PotentialPair& pots, const ModelParams& params) {
  (void)params;
  SeparationReport rep;
  rep.delta_sep = ss.delta_sep;
  rep.mu_abs = std::abs(ss.mu_s);
  rep.mesh_tol = 10.0 * mesh.h_max();

  // Wall condition near +1: beta(r) + pi(r) - |mu_s| >= 1 for all r in
  // [1-delta, 1). Scan from the singular end for the first failure, then
  // bisect the crossing. Mirrored condition near -1; keep the smaller band.
  auto wall = [&](double r, int side) {
    if (side > 0) return pots.bulk.beta(r) + pots.bulk.pi(r) - rep.mu_abs - 1.0;
    return -(pots.bulk.beta(r) + pots.bulk.pi(r)) - rep.mu_abs - 1.0;
  };
  auto threshold = [&](int side) {
    const int scan = 20000;
    const double lo = 1e-12, hi = 1.0 - 1e-12;
    double prev = hi;
    if (wall(side * prev, side) < 0.0) return 0.0;  // no band certified
    for (int i = 1; i <= scan; ++i) {
      const double r = hi - (hi - lo) * i / scan;
      if (wall(side * r, side) < 0.0) {
        double a = r, b = prev;  // wall(a) < 0 <= wall(b)
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (a + b);
          if (wall(side * mid, side) < 0.0)
            a = mid;
          else
            b = mid;
          if (b - a < 1e-14) break;
        }
        return 1.0 - 0.5 * (a + b);
      }
      prev = r;
    }
    return 1.0 - lo;  // wall holds on the whole half-interval
  };
  rep.delta_threshold = std::min(threshold(+1), threshold(-1));
  rep.satisfied = rep.delta_sep >= rep.delta_threshold - rep.mesh_tol;
  return rep;
}

LojasiewiczFit estimate_lojasiewicz(const Mesh& mesh, const OperatorSet& ops,
                                    const SteadyState& ss, const PotentialPair& pots,
                                    const ModelParams& params, int n_samples, double radius,
                                    std::uint64_t seed) {
  (void)params;
  if (n_samples < 8) throw ConfigError("lojasiewicz estimate needs >= 8 samples");
  if (!(radius > 0.0)) throw ConfigError("lojasiewicz radius must be > 0");
  const int n = mesh.num_bulk();
  const int n_radii = 4;
  const int n_dirs = std::max(2, n_samples / n_radii);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double e_star = energy(mesh, ops, ss.u, pots);
  const bool singular = pots.bulk.singular();

  // H-gradient of the energy at w: M^{-1}(A_chi w + weighted nonlinearity).
  auto gradient_norm = [&](const PhasePair& w) {
    Eigen::VectorXd g = ops.a_chi * w.bulk;
    for (int i = 0; i < n; ++i)
      g[i] += mesh.bulk_weights[i] * (pots.bulk.beta(w.bulk[i]) + pots.bulk.pi(w.bulk[i]));
    for (int b = 0; b < mesh.num_boundary(); ++b) {
      const int i = mesh.trace_map[b];
      g[i] += mesh.boundary_weights[b] * (pots.surf.beta(w.bulk[i]) + pots.surf.pi(w.bulk[i]));
    }
    PhasePair gp = pair_from_bulk(mesh, g.cwiseQuotient(ops.lumped_mass));
    const DualPair pg = project(mesh, gp);
    PhasePair tmp{pg.bulk, pg.boundary};
    return norm_h(mesh, tmp);
  };

  double max_slope = -std::numeric_limits<double>::infinity();
  double binding_residual = 0.0;
  int used = 0;
  for (int d = 0; d < n_dirs; ++d) {
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = normal(rng);
    PhasePair xp = pair_from_bulk(mesh, xi);
    const double m = mean(mesh, xp);
    xi.array() -= m;
    xp = pair_from_bulk(mesh, xi);
    const double nh = norm_h(mesh, xp);
    if (nh == 0.0) continue;
    xi /= nh;

    // Shrink the base radius for this direction until all radii stay inside.
    double r0 = radius;
    if (singular) {
      const double head = (1.0 - ss.u.bulk.cwiseAbs().maxCoeff());
      const double xi_max = xi.cwiseAbs().maxCoeff();
      if (xi_max * r0 > 0.5 * head) r0 = 0.5 * head / xi_max;
    }

    std::vector<double> xs, ys;
    for (int j = 0; j < n_radii; ++j) {
      const double r = r0 * std::pow(0.5, j);
      PhasePair w = pair_from_bulk(mesh, (ss.u.bulk + r * xi).eval());
      const double e = std::abs(energy(mesh, ops, w, pots) - e_star);
      if (e < 1e-14) continue;
      const double g = gradient_norm(w);
      if (!(g > 0.0)) continue;
      xs.push_back(std::log(e));
      ys.push_back(std::log(g));
    }
    if (xs.size() < 3) continue;
    const size_t mpts = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < mpts; ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = mpts * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) continue;
    const double slope = (mpts * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / mpts;
    double rss = 0.0;
    for (size_t i = 0; i < mpts; ++i) {
      const double e = ys[i] - (intercept + slope * xs[i]);
      rss += e * e;
    }
    ++used;
    if (slope > max_slope) {
      max_slope = slope;
      binding_residual = std::sqrt(rss / mpts);
    }
  }
  if (used == 0) throw DegenerateSamples("all sampled energy gaps fell below 1e-14");

  LojasiewiczFit fit;
  fit.binding_slope = max_slope;
  fit.theta_hat = std::min(0.5, std::max(1e-6, 1.0 - max_slope));
  fit.fit_residual = binding_residual;
  fit.directions_used = used;
  return fit;
}

}  // namespace bsch
