#include <benchmark/benchmark.h>

#include "bsch/diagnostics.hpp"
#include "bsch/stepper.hpp"

namespace {

using namespace bsch;

PotentialPair log_pots() {
  const PotentialSpec spec = PotentialSpec::logarithmic(3.0);
  return make_potential_pair(spec, spec, 0.0);
}

void BM_YosidaBeta(benchmark::State& state) {
  const PotentialSpec spec = PotentialSpec::logarithmic(3.0);
  YosidaConfig ycfg;
  ycfg.epsilon = 1e-3;
  double r = -0.95;
  for (auto _ : state) {
    benchmark::DoNotOptimize(yosida_beta(spec, ycfg, r));
    r += 1e-4;
    if (r > 0.95) r = -0.95;
  }
}
BENCHMARK(BM_YosidaBeta);

void BM_Step1D(benchmark::State& state) {
  const Mesh mesh = Mesh::interval(static_cast<int>(state.range(0)), 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.1;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::tanh;
  prof.amplitude = 0.8;
  prof.tanh_width = 0.05;
  StepConfig sc;
  sc.dt = 1e-3;
  State s = initial_state(mesh, ops, pots, params, prof);
  for (auto _ : state) {
    s = step(s, mesh, ops, params, pots, sc);
  }
}
BENCHMARK(BM_Step1D)->Arg(129)->Arg(513);

void BM_Step2D(benchmark::State& state) {
  const Mesh mesh = Mesh::strip(32, 17, 2.0, 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  const PotentialPair pots = log_pots();
  ModelParams params;
  params.m0 = 0.0;
  InitialProfile prof;
  prof.kind = InitialProfile::Kind::random;
  prof.amplitude = 0.2;
  StepConfig sc;
  sc.dt = 1e-3;
  State s = initial_state(mesh, ops, pots, params, prof);
  for (auto _ : state) {
    s = step(s, mesh, ops, params, pots, sc);
  }
}
BENCHMARK(BM_Step2D);

void BM_DualNorm(benchmark::State& state) {
  const Mesh mesh = Mesh::interval(static_cast<int>(state.range(0)), 1.0);
  const OperatorSet ops = assemble_operators(mesh, 1.0, 1.0);
  Eigen::VectorXd z(mesh.num_bulk());
  for (int i = 0; i < mesh.num_bulk(); ++i) z[i] = std::sin(7.0 * mesh.coord_x[i]);
  const DualPair f = project(mesh, pair_from_bulk(mesh, z));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_norm(ops, mesh, f));
  }
}
BENCHMARK(BM_DualNorm)->Arg(129)->Arg(513);

}  // namespace

BENCHMARK_MAIN();
