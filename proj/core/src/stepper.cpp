#include "bsch/stepper.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <random>
#include <vector>

#include "bsch/diagnostics.hpp"

namespace bsch {

namespace {

// Safeguard level: keeps Newton trials inside [-1+1/k, 1-1/k] with headroom
// half the current separation. Shared with the steady-state solver.
int effective_clamp_level(double separation, int k_min) {
  if (separation <= 2e-9) throw SeparationBreach("state too close to the pure states to step");
  const double k = std::ceil(2.0 / separation);
  return static_cast<int>(std::min(1e9, std::max(static_cast<double>(k_min), k)));
}

void clamp_vector(Eigen::VectorXd& v, int k) {
  const double bound = 1.0 - 1.0 / static_cast<double>(k);
  v = v.cwiseMax(-bound).cwiseMin(bound);
}

}  // namespace

void ModelParams::validate() const {
  if (sigma < 0.0) throw ConfigError("params.sigma must be >= 0");
  if (!(chi > 0.0)) throw ConfigError("params.chi must be > 0");
  if (kappa < 0.0) throw ConfigError("params.kappa must be >= 0");
  if (viscous_eps < 0.0) throw ConfigError("params.viscous_eps must be >= 0");
  if (yosida_eps < 0.0) throw ConfigError("params.yosida_eps must be >= 0");
  if (!(m0 > -1.0 && m0 < 1.0)) throw ConfigError("params.m0 must lie in open interval (-1,1)");
}

PotentialPair make_potential_pair(const PotentialSpec& bulk, const PotentialSpec& surf,
                                  double yosida_eps) {
  PotentialPair p;
  p.bulk = PotentialEval(bulk, yosida_eps);
  p.surf = PotentialEval(surf, yosida_eps > 0.0 ? bulk.c1 * yosida_eps : 0.0);
  return p;
}

PhasePair chemical_potential(const Mesh& mesh, const OperatorSet& ops, const PotentialPair& pots,
                             const PhasePair& u) {
  const int n = mesh.num_bulk();
  Eigen::VectorXd rhs = ops.a_chi * u.bulk;
  for (int i = 0; i < n; ++i)
    rhs[i] += mesh.bulk_weights[i] * (pots.bulk.beta(u.bulk[i]) + pots.bulk.pi(u.bulk[i]));
  for (int b = 0; b < mesh.num_boundary(); ++b) {
    const int i = mesh.trace_map[b];
    rhs[i] += mesh.boundary_weights[b] * (pots.surf.beta(u.bulk[i]) + pots.surf.pi(u.bulk[i]));
  }
  return pair_from_bulk(mesh, rhs.cwiseQuotient(ops.lumped_mass));
}

State initial_state(const Mesh& mesh, const OperatorSet& ops, const PotentialPair& pots,
                    const ModelParams& params, const InitialProfile& profile) {
  params.validate();
  const int n = mesh.num_bulk();
  Eigen::VectorXd u(n);
  switch (profile.kind) {
    case InitialProfile::Kind::constant:
      u.setConstant(params.m0);
      break;
    case InitialProfile::Kind::random: {
      std::mt19937_64 rng(profile.seed);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      for (int i = 0; i < n; ++i) u[i] = params.m0 + profile.amplitude * uni(rng);
      break;
    }
    case InitialProfile::Kind::tanh: {
      const bool is1d = mesh.kind == Mesh::Kind::interval1d;
      const double extent = is1d ? mesh.lx : mesh.ly;
      const double center = profile.tanh_center >= 0.0 ? profile.tanh_center : 0.5 * extent;
      const double width =
          profile.tanh_width > 0.0 ? profile.tanh_width : 4.0 * (is1d ? mesh.hx() : mesh.hy());
      for (int i = 0; i < n; ++i) {
        const double s = is1d ? mesh.coord_x[i] : mesh.coord_y[i];
        u[i] = profile.amplitude * std::tanh((s - center) / width);
        if (!is1d && profile.xmod_amplitude != 0.0)
          u[i] += profile.xmod_amplitude * std::cos(2.0 * M_PI * mesh.coord_x[i] / mesh.lx);
      }
      break;
    }
    case InitialProfile::Kind::file:
      u = read_snapshot_bulk(mesh, profile.file);
      break;
  }

  if (pots.bulk.singular()) {
    if (u.cwiseAbs().maxCoeff() >= 1.0)
      throw InadmissibleInitialData("initial profile contains a pure state");
  }
  PhasePair p = pair_from_bulk(mesh, u);
  // Two shift passes pin the generalized mean to m0 at machine precision.
  for (int pass = 0; pass < 2; ++pass) {
    const double m = mean(mesh, p);
    p.bulk.array() += params.m0 - m;
    sync_trace(mesh, p);
  }
  if (pots.bulk.singular() && p.bulk.cwiseAbs().maxCoeff() >= 1.0 - 1e-9)
    throw InadmissibleInitialData("mean shift left the admissible open interval (-1,1)");

  State s;
  s.t = 0.0;
  s.u = p;
  s.mu = chemical_potential(mesh, ops, pots, p);
  s.step_count = 0;
  return s;
}

State step(const State& state, const Mesh& mesh, const OperatorSet& ops,
           const ModelParams& params, const PotentialPair& pots, const StepConfig& cfg) {
  params.validate();
  if (!(cfg.dt > 0.0)) throw ConfigError("step.dt must be > 0");
  if (cfg.clamp_k < 2) throw ConfigError("step.clamp_k must be >= 2");

  const int n = mesh.num_bulk();
  const double dt = cfg.dt;
  const Eigen::VectorXd& M = ops.lumped_mass;
  const Eigen::VectorXd& wb = mesh.bulk_weights;
  const Eigen::VectorXd& bg = ops.boundary_lumped;
  const Eigen::VectorXd& un = state.u.bulk;
  const double eps_v = params.viscous_eps;

  const bool singular = pots.bulk.singular();
  const int k_clamp =
      singular ? effective_clamp_level(1.0 - un.cwiseAbs().maxCoeff(), cfg.clamp_k) : 0;

  // Explicit (concave) part: pi at the previous state, fixed over the solve.
  Eigen::VectorXd pi_expl(n);
  for (int i = 0; i < n; ++i) pi_expl[i] = wb[i] * pots.bulk.pi(un[i]);
  for (int b = 0; b < mesh.num_boundary(); ++b) {
    const int i = mesh.trace_map[b];
    pi_expl[i] += mesh.boundary_weights[b] * pots.surf.pi(un[i]);
  }

  auto residual = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& mu, Eigen::VectorXd& r1,
                      Eigen::VectorXd& r2) {
    r1 = M.cwiseProduct(u - un) + dt * (ops.a_sigma * mu);
    if (params.kappa != 0.0) r1 += dt * params.kappa * bg.cwiseProduct(mu);
    r2 = M.cwiseProduct(mu) - ops.a_chi * u - pi_expl;
    for (int i = 0; i < n; ++i) r2[i] -= wb[i] * pots.bulk.beta(u[i]);
    for (int b = 0; b < mesh.num_boundary(); ++b) {
      const int i = mesh.trace_map[b];
      r2[i] -= mesh.boundary_weights[b] * pots.surf.beta(u[i]);
    }
    if (eps_v > 0.0) r2 -= (eps_v / dt) * M.cwiseProduct(u - un);
  };
  auto scaled_err = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) {
    return std::max((r1.cwiseQuotient(M)).cwiseAbs().maxCoeff(),
                    (r2.cwiseQuotient(M)).cwiseAbs().maxCoeff());
  };

  Eigen::VectorXd u = un;
  Eigen::VectorXd mu = state.mu.bulk;
  Eigen::VectorXd r1(n), r2(n);
  residual(u, mu, r1, r2);
  double err = scaled_err(r1, r2);
  // The residual floor scales with the chemical potential: stiff early steps
  // carry mu = O(1/dt) and cannot reach an absolute 1e-12.
  const double tol = cfg.newton_tol * std::max(1.0, mu.cwiseAbs().maxCoeff());

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool converged = err <= tol;
  for (int iter = 0; iter < cfg.newton_max_iter && !converged; ++iter) {
    // Stacked Jacobian in (u, mu).
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * n + 2 * ops.a_sigma.nonZeros());
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, M[i]);
    for (int k = 0; k < ops.a_sigma.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(ops.a_sigma, k); it; ++it)
        trips.emplace_back(it.row(), n + it.col(), dt * it.value());
    }
    if (params.kappa != 0.0) {
      for (int i = 0; i < n; ++i) {
        if (bg[i] != 0.0) trips.emplace_back(i, n + i, dt * params.kappa * bg[i]);
      }
    }
    for (int k = 0; k < ops.a_chi.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(ops.a_chi, k); it; ++it)
        trips.emplace_back(n + it.row(), it.col(), -it.value());
    }
    for (int i = 0; i < n; ++i) {
      double diag = wb[i] * pots.bulk.beta_prime(u[i]);
      if (bg[i] != 0.0) diag += bg[i] * pots.surf.beta_prime(u[i]);
      if (eps_v > 0.0) diag += (eps_v / dt) * M[i];
      trips.emplace_back(n + i, i, -diag);
      trips.emplace_back(n + i, n + i, M[i]);
    }
    Eigen::SparseMatrix<double> J(2 * n, 2 * n);
    J.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = -r1;
    rhs.tail(n) = -r2;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw NewtonDivergence("step Jacobian factorization failed; suggest smaller dt");
    const Eigen::VectorXd delta = lu.solve(rhs);

    double s = 1.0;
    const int max_backtrack = cfg.linesearch == StepConfig::Linesearch::backtracking ? 12 : 1;
    bool accepted = false;
    for (int bt = 0; bt < max_backtrack; ++bt) {
      Eigen::VectorXd u_try = u + s * delta.head(n);
      Eigen::VectorXd mu_try = mu + s * delta.tail(n);
      if (singular) clamp_vector(u_try, k_clamp);
      Eigen::VectorXd t1(n), t2(n);
      residual(u_try, mu_try, t1, t2);
      const double err_try = scaled_err(t1, t2);
      if (err_try <= (1.0 - 1e-4 * s) * err ||
          cfg.linesearch == StepConfig::Linesearch::none) {
        u = u_try;
        mu = mu_try;
        r1 = t1;
        r2 = t2;
        err = err_try;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      // Stalled at the rounding floor just above the tolerance: keep the
      // iterate; the energy postcondition below still guards the result.
      if (err <= 10.0 * tol) break;
      throw NewtonDivergence("step Newton backtracking stalled; suggest smaller dt");
    }
    converged = err <= tol;
  }
  if (!(err <= 10.0 * tol))
    throw NewtonDivergence("step Newton exceeded max iterations; suggest smaller dt");

  // Anchor the total mass identity exactly: the converged residual still
  // carries O(tol) in the constant direction, removed by a uniform shift.
  const double boundary_flux = bg.dot(mu);
  const double target_total = M.dot(un) - dt * params.kappa * boundary_flux;
  const double shift = (target_total - M.dot(u)) / M.sum();
  u.array() += shift;

  if (singular) {
    if (u.cwiseAbs().maxCoeff() >= 1.0 - 1e-12)
      throw SeparationBreach("converged step reached the pure states");
  }

  State next;
  next.t = state.t + dt;
  next.u = pair_from_bulk(mesh, u);
  next.mu = pair_from_bulk(mesh, mu);
  next.step_count = state.step_count + 1;

  const double e_prev = energy(mesh, ops, state.u, pots);
  const double e_next = energy(mesh, ops, next.u, pots);
  if (e_next > e_prev + 1e-10 * std::abs(e_prev) + 1e-14)
    throw Error("discrete energy increased across a step: " + std::to_string(e_prev) + " -> " +
                std::to_string(e_next));
  return next;
}

State run(State state, const Mesh& mesh, const OperatorSet& ops, const ModelParams& params,
          const PotentialPair& pots, const StepConfig& cfg, double t_end,
          const StepCallback& callback) {
  if (t_end < state.t) throw ConfigError("run: t_end must be >= the current time");
  const double dt_min = cfg.dt_min > 0.0 ? cfg.dt_min : cfg.dt / 1048576.0;
  const double dt_max = cfg.dt_max > 0.0 ? cfg.dt_max : cfg.dt;
  double dt_cur = cfg.dt;
  int streak = 0;
  const double t_tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (state.t < t_end - t_tol) {
    StepConfig local = cfg;
    local.dt = std::min(dt_cur, t_end - state.t);
    State next;
    try {
      next = step(state, mesh, ops, params, pots, local);
    } catch (const NewtonDivergence&) {
      dt_cur *= 0.5;
      streak = 0;
      if (dt_cur < dt_min)
        throw StepFloorReached("adaptive stepping hit dt_min = " + std::to_string(dt_min));
      continue;
    }
    if (callback) callback(next, state);
    state = std::move(next);
    if (++streak >= 10 && dt_cur < dt_max) {
      dt_cur = std::min(dt_max, 2.0 * dt_cur);
      streak = 0;
    }
  }
  return state;
}

}  // namespace bsch
