#include <doctest.h>

#include <cmath>

#include "bsch/diagnostics.hpp"
#include "bsch/stationary.hpp"

using namespace bsch;

namespace {

PotentialPair log_pots(double c = 3.0) {
  const PotentialSpec s = PotentialSpec::logarithmic(c);
  return make_potential_pair(s, s, 0.0);
}

}  // namespace

TEST_CASE("constant guess converges immediately to the constant steady state") {
  const Mesh mesh = Mesh::interval(17, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  for (double m0 : {-0.5, 0.0, 0.3}) {
    for (double c : {1.5, 3.0}) {
      const PotentialPair pots = log_pots(c);
      ModelParams params;
      params.m0 = m0;
      const SteadyState ss =
          solve_steady(mesh, ops, params, pots, constant_pair(mesh, m0), 1e-12);
      CHECK((ss.u.bulk.array() - m0).abs().maxCoeff() <= 1e-13);
      const double expect = eval_beta(pots.bulk.spec(), m0) + eval_pi(pots.bulk.spec(), m0);
      CHECK(ss.mu_s == doctest::Approx(expect).epsilon(1e-13));
      CHECK(ss.delta_sep == doctest::Approx(1.0 - std::abs(m0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mu_s average formula") {
  const Mesh mesh = Mesh::interval(33, 1.0);
  const PotentialPair pots = log_pots();
  CHECK(mu_s_from_average(mesh, constant_pair(mesh, 0.0), pots) ==
        doctest::Approx(0.0).epsilon(1e-15));
  // u = 0.5 everywhere: beta + pi = ln 3 - 3
  CHECK(mu_s_from_average(mesh, constant_pair(mesh, 0.5), pots) ==
        doctest::Approx(std::log(3.0) - 3.0).epsilon(1e-14));
  CHECK(mu_s_from_average(mesh, constant_pair(mesh, 0.5), pots) ==
        doctest::Approx(-1.9013877113).epsilon(1e-9));
  CHECK_THROWS_AS(mu_s_from_average(mesh, constant_pair(mesh, 1.0), pots), DomainError);
}

TEST_CASE("steady state from a relaxed run is consistent with the time solver") {
  const Mesh mesh = Mesh::interval(33, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.8;
  prof.tanh_width = 0.08;
  StepConfig sc;
  sc.dt = 1e-3;
  const State s0 = initial_state(mesh, ops, pots, params, prof);
  const State fin = run(s0, mesh, ops, params, pots, sc, 2.0);

  const SteadyState ss = solve_steady(mesh, ops, params, pots, fin.u, 1e-12);
  CHECK(ss.residual_norm <= 1e-10);
  CHECK(std::abs(mean(mesh, ss.u) - 0.1) <= 1e-12);
  CHECK(ss.delta_sep > 0.0);
  // the converged multiplier matches the average identity and the time
  // solver's mean chemical potential
  CHECK(std::abs(ss.mu_s - mu_s_from_average(mesh, ss.u, pots)) <= 1e-11);
  CHECK(std::abs(ss.mu_s - mean(mesh, fin.mu)) <= 1e-6);

  // fixed point of the stepper within 1e-8 * dt
  State at;
  at.t = 0.0;
  at.u = ss.u;
  at.mu = chemical_potential(mesh, ops, pots, ss.u);
  const State moved = step(at, mesh, ops, params, pots, sc);
  CHECK((moved.u.bulk - ss.u.bulk).cwiseAbs().maxCoeff() <= 1e-8 * sc.dt);
}

TEST_CASE("steady solve rejects a guess at the pure states") {
  const Mesh mesh = Mesh::interval(17, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.num_bulk());
  g[5] = 1.0 - 1e-13;
  CHECK_THROWS_AS(solve_steady(mesh, ops, params, pots, pair_from_bulk(mesh, g), 1e-10),
                  NonAdmissibleIterate);
}

TEST_CASE("separation report: threshold construction and monotonicity") {
  const Mesh mesh = Mesh::interval(33, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.0;
  const SteadyState ss = solve_steady(mesh, ops, params, pots, constant_pair(mesh, 0.0), 1e-12);
  const SeparationReport rep = steady_separation_report(mesh, ss, pots, params);
  CHECK(rep.delta_sep == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.mu_abs <= 1e-12);
  CHECK(rep.delta_threshold > 0.0);
  CHECK(rep.satisfied);

  // dense-scan oracle for the wall crossing: largest r with
  // beta(r) + pi(r) - |mu_s| < 1
  auto scan_threshold = [&](double mu_abs) {
    double r_cross = 0.0;
    for (int i = 20000000; i >= 1; --i) {
      const double r = i / 20000001.0;
      const double w = eval_beta(pots.bulk.spec(), r) + eval_pi(pots.bulk.spec(), r) - mu_abs;
      if (w < 1.0) {
        r_cross = r;
        break;
      }
    }
    return 1.0 - r_cross;
  };
  CHECK(rep.delta_threshold == doctest::Approx(scan_threshold(rep.mu_abs)).epsilon(1e-6));

  // threshold shrinks as |mu_s| grows
  double prev = 1.0;
  for (double mu : {0.0, 0.5, 1.0, 2.0}) {
    SteadyState fake = ss;
    fake.mu_s = mu;
    const SeparationReport r = steady_separation_report(mesh, fake, pots, params);
    CHECK(r.delta_threshold <= prev + 1e-15);
    prev = r.delta_threshold;
  }
}

TEST_CASE("lojasiewicz exponent: quadratic toy saturates at one half") {
  // linear tabulated beta with no perturbation: a strictly convex quadratic
  // energy, whose gradient scales as the square root of the energy gap
  std::vector<double> rs, bs;
  for (int i = 0; i <= 16; ++i) {
    rs.push_back(-1.2 + 0.15 * i);
    bs.push_back(rs.back());
  }
  const PotentialSpec lin = PotentialSpec::custom(rs, bs, 0.0, false);
  const PotentialPair pots = make_potential_pair(lin, lin, 0.0);
  const Mesh mesh = Mesh::interval(17, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  ModelParams params;
  params.m0 = 0.0;
  const SteadyState ss = solve_steady(mesh, ops, params, pots, constant_pair(mesh, 0.0), 1e-12);
  const LojasiewiczFit fit = estimate_lojasiewicz(mesh, ops, ss, pots, params, 32, 1e-3);
  CHECK(fit.theta_hat == doctest::Approx(0.5).epsilon(2e-2));
  CHECK(fit.fit_residual < 0.05);
}

TEST_CASE("lojasiewicz exponent near a stable logarithmic state") {
  // on the unit interval the constant state is linearly stable for c = 3
  const Mesh mesh = Mesh::interval(33, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  const SteadyState ss = solve_steady(mesh, ops, params, pots, constant_pair(mesh, 0.1), 1e-12);
  const LojasiewiczFit f1 = estimate_lojasiewicz(mesh, ops, ss, pots, params, 32, 1e-3);
  CHECK(f1.theta_hat > 0.0);
  CHECK(f1.theta_hat <= 0.5);
  // radius stability
  const LojasiewiczFit f2 = estimate_lojasiewicz(mesh, ops, ss, pots, params, 32, 5e-4);
  CHECK(std::abs(f1.theta_hat - f2.theta_hat) < 0.05);

  CHECK_THROWS_AS(estimate_lojasiewicz(mesh, ops, ss, pots, params, 32, 1e-300),
                  DegenerateSamples);
}
