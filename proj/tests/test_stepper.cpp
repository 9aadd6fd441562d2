#include <doctest.h>

#include <cmath>
#include <vector>

#include "bsch/diagnostics.hpp"
#include "bsch/stepper.hpp"
#include "support/oracles.hpp"

using namespace bsch;

namespace {

PotentialPair log_pots(double c = 3.0, double yosida_eps = 0.0) {
  const PotentialSpec s = PotentialSpec::logarithmic(c);
  return make_potential_pair(s, s, yosida_eps);
}

struct Setup {
  Mesh mesh;
  OperatorSet ops;
  Setup(int n, double sigma = 1.0) : mesh(Mesh::interval(n, 1.0)) {
    ops = assemble_operators(mesh, sigma, 1.0);
  }
};

}  // namespace

TEST_CASE("initial state: constant, random shift, pure-state rejection") {
  Setup s(33);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;

  InitialProfile constant;
  constant.kind = InitialProfile::Kind::constant;
  const State st = initial_state(s.mesh, s.ops, pots, params, constant);
  CHECK(st.u.bulk.minCoeff() == doctest::Approx(0.1));
  CHECK(st.u.bulk.maxCoeff() == doctest::Approx(0.1));
  CHECK(mean(s.mesh, st.u) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(trace_compatible(s.mesh, st.u));

  InitialProfile random;
  random.kind = InitialProfile::Kind::random;
  random.amplitude = 0.05;
  ModelParams zero_mean = params;
  zero_mean.m0 = 0.0;
  const State sr = initial_state(s.mesh, s.ops, pots, zero_mean, random);
  CHECK(std::abs(mean(s.mesh, sr.u)) <= 1e-15);

  // a profile reaching a pure state is rejected outright
  InitialProfile wide;
  wide.kind = InitialProfile::Kind::random;
  wide.amplitude = 1.5;
  CHECK_THROWS_AS(initial_state(s.mesh, s.ops, pots, zero_mean, wide),
                  InadmissibleInitialData);
}

TEST_CASE("constant state is a fixed point with mu = beta(m0) + pi(m0)") {
  Setup s(17);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::constant;
  const State st = initial_state(s.mesh, s.ops, pots, params, prof);
  StepConfig sc;
  sc.dt = 1e-3;
  const State st1 = step(st, s.mesh, s.ops, params, pots, sc);
  CHECK((st1.u.bulk - st.u.bulk).cwiseAbs().maxCoeff() <= 1e-13);
  const double mu_expect = eval_beta(pots.bulk.spec(), 0.1) + eval_pi(pots.bulk.spec(), 0.1);
  CHECK((st1.mu.bulk.array() - mu_expect).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("one step matches the dense fully-implicit oracle to O(dt)") {
  const int n = 16;
  Setup s(n, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.0;
  params.sigma = 1.0;

  // sinusoidal start; zero mean by periodic symmetry of the sample points
  Eigen::VectorXd u0(n);
  for (int i = 0; i < n; ++i) u0[i] = 0.4 * std::sin(2.0 * M_PI * s.mesh.coord_x[i]);
  State st;
  st.t = 0.0;
  st.u = pair_from_bulk(s.mesh, u0);
  st.mu = chemical_potential(s.mesh, s.ops, pots, st.u);

  oracles::Dense1D grid(n, 1.0);
  oracles::ImplicitStep1D oracle;
  oracle.beta = [](double r) { return std::log((1.0 + r) / (1.0 - r)); };
  oracle.beta_prime = [](double r) { return 2.0 / (1.0 - r * r); };
  oracle.pi = [](double r) { return -6.0 * r; };
  oracle.pi_prime = [](double) { return -6.0; };

  auto gap_at = [&](double dt) {
    StepConfig sc;
    sc.dt = dt;
    const State got = step(st, s.mesh, s.ops, params, pots, sc);
    const Eigen::VectorXd want = oracle.advance(grid, u0, dt);
    return (got.u.bulk - want).cwiseAbs().maxCoeff();
  };

  const double dt = 1e-3;
  const double g1 = gap_at(dt);
  const double g2 = gap_at(dt / 2.0);
  const double moved = (oracle.advance(grid, u0, dt) - u0).cwiseAbs().maxCoeff();
  CHECK(g1 <= dt * std::max(1.0, moved) * 50.0);  // splitting difference vanishes with dt
  CHECK(g1 / g2 >= 1.8);                          // Richardson: at least first order
}

TEST_CASE("permeable wall: one-step mass balance by hand quadrature") {
  Setup s(33);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  params.kappa = 0.5;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.6;
  prof.tanh_width = 0.1;
  const State st = initial_state(s.mesh, s.ops, pots, params, prof);
  StepConfig sc;
  sc.dt = 1e-3;
  const State st1 = step(st, s.mesh, s.ops, params, pots, sc);

  const double total0 = mean(s.mesh, st.u) * (s.mesh.omega_measure + s.mesh.gamma_measure);
  const double total1 = mean(s.mesh, st1.u) * (s.mesh.omega_measure + s.mesh.gamma_measure);
  // boundary integral of mu at the new time: counting measure on 2 endpoints
  const double flux = st1.mu.boundary[0] + st1.mu.boundary[1];
  CHECK(std::abs(total1 - total0 + params.kappa * sc.dt * flux) <=
        1e-10 * std::max(1.0, std::abs(total0)));

  // mass strictly conserved when kappa = 0
  ModelParams closed = params;
  closed.kappa = 0.0;
  State cur = initial_state(s.mesh, s.ops, pots, closed, prof);
  StepConfig sc2;
  sc2.dt = 2e-3;
  for (int k = 0; k < 25; ++k) {
    cur = step(cur, s.mesh, s.ops, closed, pots, sc2);
    CHECK(std::abs(mean(s.mesh, cur.u) - 0.1) <= 1e-12);
  }
}

TEST_CASE("energy decreases and separation stays positive along a 1D run") {
  Setup s(65);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.8;
  prof.tanh_width = 0.05;
  State st = initial_state(s.mesh, s.ops, pots, params, prof);
  StepConfig sc;
  sc.dt = 1e-3;
  double e_prev = energy(s.mesh, s.ops, st.u, pots);
  double min_sep = 1.0;
  for (int k = 0; k < 200; ++k) {
    st = step(st, s.mesh, s.ops, params, pots, sc);
    const double e = energy(s.mesh, s.ops, st.u, pots);
    CHECK(e <= e_prev + 1e-10 * std::abs(e_prev));
    e_prev = e;
    min_sep = std::min(min_sep, 1.0 - st.u.bulk.cwiseAbs().maxCoeff());
  }
  CHECK(min_sep > 0.0);
}

TEST_CASE("two-phase plateau sits near the double-well minima") {
  Setup s(129);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.8;
  prof.tanh_width = 0.05;
  State st = initial_state(s.mesh, s.ops, pots, params, prof);
  StepConfig sc;
  sc.dt = 1e-3;
  const State fin = run(st, s.mesh, s.ops, params, pots, sc, 1.0);
  const double rstar = double_well_minima(pots.bulk.spec());
  const double plateau = fin.u.bulk.cwiseAbs().maxCoeff();
  CHECK(std::abs(plateau - rstar) <= 10.0 * s.mesh.hx());
}

TEST_CASE("viscous/yosida runs approach the exact singular run") {
  Setup s(33);
  ModelParams base;
  base.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.8;
  prof.tanh_width = 0.08;
  StepConfig sc;
  sc.dt = 1e-3;
  auto final_u = [&](double eps) {
    ModelParams p = base;
    p.viscous_eps = eps;
    p.yosida_eps = eps;
    const PotentialPair pp = log_pots(3.0, eps);
    const State st = initial_state(s.mesh, s.ops, pp, p, prof);
    return run(st, s.mesh, s.ops, p, pp, sc, 0.02).u;
  };
  const PhasePair ref = final_u(0.0);
  double prev = 1e9;
  for (double eps : {1e-2, 1e-3}) {
    const PhasePair ue = final_u(eps);
    PhasePair d;
    d.bulk = ue.bulk - ref.bulk;
    d.boundary = ue.boundary - ref.boundary;
    const double gap = norm_h(s.mesh, d);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("sigma zero and positive both run on the strip") {
  const Mesh mesh = Mesh::strip(8, 6, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.0;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::random;
  prof.amplitude = 0.2;
  StepConfig sc;
  sc.dt = 1e-3;
  for (double sigma : {0.0, 1.0}) {
    const OperatorSet ops = assemble_operators(mesh, sigma, 1.0);
    ModelParams p = params;
    p.sigma = sigma;
    State st = initial_state(mesh, ops, pots, p, prof);
    CHECK_NOTHROW(st = step(st, mesh, ops, p, pots, sc));
    CHECK_NOTHROW(st = step(st, mesh, ops, p, pots, sc));
  }
}

TEST_CASE("run: zero horizon identity and adaptive step recovery") {
  Setup s(33);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.8;
  prof.tanh_width = 0.05;
  const State st = initial_state(s.mesh, s.ops, pots, params, prof);

  StepConfig sc;
  sc.dt = 1e-3;
  const State same = run(st, s.mesh, s.ops, params, pots, sc, st.t);
  CHECK(same.step_count == 0);
  CHECK((same.u.bulk - st.u.bulk).cwiseAbs().maxCoeff() == 0.0);

  // an oversized dt forces halving; the run still completes
  StepConfig big = sc;
  big.dt = 0.5;
  big.newton_max_iter = 8;
  big.dt_min = 1e-8;
  int accepted = 0;
  const State fin = run(st, s.mesh, s.ops, params, pots, big, 0.05,
                        [&](const State&, const State&) { ++accepted; });
  CHECK(fin.t == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(accepted == fin.step_count);

  // an impossible floor reports StepFloorReached
  StepConfig hopeless = big;
  hopeless.newton_max_iter = 1;
  hopeless.linesearch = StepConfig::Linesearch::none;
  hopeless.dt_min = 0.4;
  CHECK_THROWS_AS(run(st, s.mesh, s.ops, params, pots, hopeless, 0.05), StepFloorReached);
}
