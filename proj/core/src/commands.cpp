#include "bsch/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "bsch/diagnostics.hpp"
#include "bsch/stationary.hpp"
#include "bsch/version.hpp"

namespace bsch {

namespace {

namespace fs = std::filesystem;

// Bound on trajectory states kept in memory for the post-hoc decay fit.
constexpr size_t kKeepStates = 4096;

void write_manifest(const std::string& path, const RunConfig& cfg, double wall_seconds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open manifest for writing: " + path);
  out << "# run manifest\n";
  out << "tool_version = " << kVersion << "\n";
  for (const auto& line : effective_config_lines(cfg)) out << line << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "wall_time_seconds = %.3f\n", wall_seconds);
  out << buf;
}

int map_exception(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) {
    std::cerr << "failure: CONFIG_ERROR: " << e.what() << "\n";
    return kExitConfig;
  }
  if (dynamic_cast<const StepFloorReached*>(&e) || dynamic_cast<const NewtonDivergence*>(&e)) {
    std::cerr << "failure: NEWTON_DIVERGENCE: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cerr << "failure: RUNTIME_ERROR: " << e.what() << "\n";
  return kExitRuntime;
}

std::string snapshot_path(const std::string& dir, long step, bool gamma) {
  char name[64];
  std::snprintf(name, sizeof(name), gamma ? "step_%08ld_gamma.csv" : "step_%08ld.csv", step);
  return dir + "/" + name;
}

struct CheckPrinter {
  bool all_pass = true;
  void pass(const std::string& name) { std::cout << name << ": PASS\n"; }
  void fail(const std::string& name, const std::string& why) {
    std::cout << name << ": FAIL (" << why << ")\n";
    all_pass = false;
  }
  void skipped(const std::string& name, const std::string& why) {
    std::cout << name << ": SKIPPED (" << why << ")\n";
  }
  void report(const std::string& name, bool ok, const std::string& why) {
    if (ok)
      pass(name);
    else
      fail(name, why);
  }
};

struct TrajectoryData {
  std::vector<DiagnosticsRecord> records;
  std::deque<State> kept;  // most recent states at record cadence
  State final_state;
};

TrajectoryData run_trajectory(const Mesh& mesh, const OperatorSet& ops, const ModelParams& params,
                              const PotentialPair& pots, const StepConfig& sc,
                              const InitialProfile& profile, double t_end, int every,
                              const std::string* snapshot_dir = nullptr) {
  TrajectoryData data;
  State s0 = initial_state(mesh, ops, pots, params, profile);
  data.records.push_back(record(s0, mesh, ops, pots, params));
  data.kept.push_back(s0);
  if (snapshot_dir) {
    write_snapshot(mesh, s0.u, snapshot_path(*snapshot_dir, 0, false));
    write_boundary_snapshot(mesh, s0.u, snapshot_path(*snapshot_dir, 0, true));
  }
  State prev_recorded = s0;
  auto cb = [&](const State& cur, const State&) {
    if (cur.step_count % every != 0) return;
    data.records.push_back(record(cur, mesh, ops, pots, params, &prev_recorded));
    prev_recorded = cur;
    data.kept.push_back(cur);
    if (data.kept.size() > kKeepStates) data.kept.pop_front();
    if (snapshot_dir) {
      write_snapshot(mesh, cur.u, snapshot_path(*snapshot_dir, cur.step_count, false));
      write_boundary_snapshot(mesh, cur.u, snapshot_path(*snapshot_dir, cur.step_count, true));
    }
  };
  data.final_state = run(s0, mesh, ops, params, pots, sc, t_end, cb);
  return data;
}

// Fills dist_to_steady for the records whose states were kept in memory.
void fill_distances(TrajectoryData& data, const Mesh& mesh, const PhasePair& ref) {
  const size_t kept = data.kept.size();
  const size_t offset = data.records.size() - kept;
  for (size_t k = 0; k < kept; ++k) {
    PhasePair diff;
    diff.bulk = data.kept[k].u.bulk - ref.bulk;
    diff.boundary = data.kept[k].u.boundary - ref.boundary;
    data.records[offset + k].dist_to_steady = norm_h(mesh, diff);
  }
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(out_dir);
    const std::string snap_dir = out_dir + "/snapshots";
    fs::create_directories(snap_dir);

    const Mesh mesh = build_mesh(cfg);
    const OperatorSet ops = assemble_operators(mesh, cfg.params.sigma, cfg.params.chi);
    const PotentialPair pots = build_potential_pair(cfg);
    const StepConfig sc = build_step_config(cfg);

    for (const auto& line : effective_config_lines(cfg)) std::cout << line << "\n";

    TrajectoryData data = run_trajectory(mesh, ops, cfg.params, pots, sc, build_profile(cfg),
                                         cfg.step.t_end, cfg.output.every_steps, &snap_dir);

    // Post-hoc decay fit against the steady state continued from the final
    // field; skipped (with a note) when that solve does not converge.
    try {
      const SteadyState ss =
          solve_steady(mesh, ops, cfg.params, pots, data.final_state.u, cfg.steady.tol);
      fill_distances(data, mesh, ss.u);
      const DecayFit fit = fit_decay(data.records);
      write_decay_fit(out_dir + "/decay_fit.txt", fit);
    } catch (const Error& e) {
      std::ofstream out(out_dir + "/decay_fit.txt");
      out << "# decay fit unavailable: " << e.what() << "\n";
    }

    write_diagnostics_csv(out_dir + "/diagnostics.csv", data.records);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out_dir + "/manifest.txt", cfg, wall);
    std::cout << "simulate: " << data.final_state.step_count << " steps to t = "
              << data.final_state.t << ", " << data.records.size() << " records\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return map_exception(e);
  }
}

int cmd_steady(const RunConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(out_dir);
    const Mesh mesh = build_mesh(cfg);
    const OperatorSet ops = assemble_operators(mesh, cfg.params.sigma, cfg.params.chi);
    const PotentialPair pots = build_potential_pair(cfg);

    PhasePair guess;
    if (cfg.steady.guess == "constant") {
      guess = constant_pair(mesh, cfg.params.m0);
    } else {
      guess = pair_from_bulk(mesh, read_snapshot_bulk(mesh, cfg.steady.file));
    }
    const SteadyState ss = solve_steady(mesh, ops, cfg.params, pots, guess, cfg.steady.tol);
    const double mu_avg = mu_s_from_average(mesh, ss.u, pots);
    const SeparationReport sep = steady_separation_report(mesh, ss, pots, cfg.params);
    const LojasiewiczFit ls = estimate_lojasiewicz(mesh, ops, ss, pots, cfg.params,
                                                   cfg.steady.samples, cfg.steady.radius);
    const LojasiewiczFit ls_half = estimate_lojasiewicz(mesh, ops, ss, pots, cfg.params,
                                                        cfg.steady.samples, 0.5 * cfg.steady.radius);

    write_snapshot(mesh, ss.u, out_dir + "/steady.csv");
    std::ofstream rep(out_dir + "/steady_report.txt");
    char buf[256];
    std::snprintf(buf, sizeof(buf), "mu_s = %.17g\nmu_s_from_average = %.17g\n", ss.mu_s, mu_avg);
    rep << buf;
    std::snprintf(buf, sizeof(buf), "residual_norm = %.17g\ndelta_sep = %.17g\n",
                  ss.residual_norm, ss.delta_sep);
    rep << buf;
    std::snprintf(buf, sizeof(buf),
                  "separation_threshold = %.17g\nseparation_satisfied = %d\nmesh_tol = %.17g\n",
                  sep.delta_threshold, sep.satisfied ? 1 : 0, sep.mesh_tol);
    rep << buf;
    std::snprintf(buf, sizeof(buf),
                  "theta_hat = %.17g\ntheta_hat_half_radius = %.17g\n"
                  "theta_radius_sensitivity = %.17g\nfit_residual = %.17g\n",
                  ls.theta_hat, ls_half.theta_hat, std::abs(ls.theta_hat - ls_half.theta_hat),
                  ls.fit_residual);
    rep << buf;

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out_dir + "/manifest.txt", cfg, wall);
    std::cout << "steady: mu_s = " << ss.mu_s << ", residual = " << ss.residual_norm
              << ", delta_sep = " << ss.delta_sep << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return map_exception(e);
  }
}

int cmd_verify(const RunConfig& cfg, bool fast) {
  CheckPrinter out;
  try {
    const PotentialSpec bulk_spec = build_potential(cfg.potential);
    const PotentialSpec surf_spec = build_potential(cfg.surface_potential);
    try {
      validate_assumptions(bulk_spec, surf_spec, cfg.params.m0, 2000).require();
      std::cout << "ASSUMPTIONS: PASS\n";
    } catch (const AssumptionViolation& e) {
      std::cout << "ASSUMPTIONS: FAIL (" << e.what() << ")\n";
      return kExitVerifyFail;
    }

    const PotentialPair pots = make_potential_pair(bulk_spec, surf_spec, cfg.params.yosida_eps);
    const int n = fast ? 65 : 129;
    const double t_end = fast ? 0.25 : 1.0;
    const Mesh mesh = Mesh::interval(n, 1.0);
    const OperatorSet ops = assemble_operators(mesh, cfg.params.sigma, cfg.params.chi);

    ModelParams base = cfg.params;
    base.kappa = 0.0;
    StepConfig sc;
    sc.dt = 1e-3;

    InitialProfile prof;
    prof.kind = InitialProfile::Kind::tanh;
    prof.amplitude = std::min(0.8, 0.9 - std::abs(base.m0));
    prof.tanh_width = 0.05;

    TrajectoryData base_run =
        run_trajectory(mesh, ops, base, pots, sc, prof, t_end, 1);
    const auto& recs = base_run.records;

    {
      double worst = 0.0;
      for (const auto& r : recs) worst = std::max(worst, std::abs(r.mass - base.m0));
      out.report("MASS_CONSERVATION", worst <= 1e-12,
                 "max |m(u)-m0| = " + std::to_string(worst));
    }
    {
      bool ok = true;
      double jump = 0.0;
      for (size_t i = 1; i < recs.size(); ++i) {
        const double slack = 1e-10 * std::abs(recs[i - 1].energy);
        if (recs[i].energy > recs[i - 1].energy + slack) {
          ok = false;
          jump = recs[i].energy - recs[i - 1].energy;
        }
      }
      out.report("ENERGY_MONOTONE", ok, "energy increased by " + std::to_string(jump));
    }
    {
      const double t_short = fast ? 0.1 : 0.25;
      StepConfig sc2 = sc;
      sc2.dt = 5e-4;
      TrajectoryData run_a = run_trajectory(mesh, ops, base, pots, sc, prof, t_short, 1);
      TrajectoryData run_b = run_trajectory(mesh, ops, base, pots, sc2, prof, t_short, 1);
      const double d_a = check_energy_identity(run_a.records, 0.0).max_defect;
      const double d_b = check_energy_identity(run_b.records, 0.0).max_defect;
      const double ratio = d_b > 0.0 ? d_a / d_b : 0.0;
      out.report("ENERGY_IDENTITY_ORDER", ratio >= 1.6 && ratio <= 2.4,
                 "defect ratio " + std::to_string(ratio));
    }
    {
      double min_sep = 1.0;
      for (const auto& r : recs) min_sep = std::min(min_sep, r.separation);
      out.report("SEPARATION_POSITIVE", min_sep > 0.0 && recs.back().separation > 1e-3,
                 "min separation = " + std::to_string(min_sep));
    }
    if (cfg.params.yosida_eps > 0.0) {
      out.skipped("YOSIDA_LIMIT", "yosida_eps fixed by the configuration");
    } else {
      const Mesh mesh_y = Mesh::interval(65, 1.0);
      const OperatorSet ops_y = assemble_operators(mesh_y, base.sigma, base.chi);
      const double t_y = 0.05;
      InitialProfile prof_y = prof;
      StepConfig sc_y = sc;
      auto final_u = [&](double eps) {
        ModelParams p = base;
        p.viscous_eps = eps;
        p.yosida_eps = eps;
        const PotentialPair pp = make_potential_pair(bulk_spec, surf_spec, eps);
        TrajectoryData d = run_trajectory(mesh_y, ops_y, p, pp, sc_y, prof_y, t_y, 1000000);
        return d.final_state.u;
      };
      const PhasePair ref = final_u(0.0);
      bool ok = true;
      std::string why;
      double prev_gap = -1.0;
      for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        PhasePair ue = final_u(eps);
        PhasePair diff;
        diff.bulk = ue.bulk - ref.bulk;
        diff.boundary = ue.boundary - ref.boundary;
        const double gap = norm_h(mesh_y, diff);
        if (prev_gap >= 0.0 && !(gap <= prev_gap / 2.0)) {
          ok = false;
          why = "gap shrink factor below 2 at eps = " + std::to_string(eps);
        }
        prev_gap = gap;
      }
      out.report("YOSIDA_LIMIT", ok, why);
    }
    {
      bool ok = true;
      std::string why;
      try {
        const SteadyState ss =
            solve_steady(mesh, ops, base, pots, base_run.final_state.u, 1e-12);
        const double gap = std::abs(ss.mu_s - mu_s_from_average(mesh, ss.u, pots));
        if (ss.residual_norm > 1e-10) {
          ok = false;
          why = "residual " + std::to_string(ss.residual_norm);
        } else if (gap > 1e-9) {
          ok = false;
          why = "mu_s average defect " + std::to_string(gap);
        } else {
          State at_steady;
          at_steady.t = 0.0;
          at_steady.u = ss.u;
          at_steady.mu = chemical_potential(mesh, ops, pots, ss.u);
          const State moved = step(at_steady, mesh, ops, base, pots, sc);
          const double motion = (moved.u.bulk - ss.u.bulk).cwiseAbs().maxCoeff();
          if (motion > 1e-8) {
            ok = false;
            why = "steady state moved by " + std::to_string(motion);
          }
        }
      } catch (const Error& e) {
        ok = false;
        why = e.what();
      }
      out.report("STEADY_CONSISTENCY", ok, why);
    }
    {
      ModelParams perm = base;
      perm.kappa = 0.5;
      TrajectoryData d = run_trajectory(mesh, ops, perm, pots, sc, prof, 0.05, 1);
      bool ok = true;
      double worst = 0.0;
      for (size_t i = 1; i < d.records.size(); ++i) {
        const double dt = d.records[i].t - d.records[i - 1].t;
        const double defect = std::abs(d.records[i].total_mass_raw -
                                       d.records[i - 1].total_mass_raw +
                                       perm.kappa * dt * d.records[i].boundary_mu_integral);
        const double scale = std::max(1.0, std::abs(d.records[i].total_mass_raw));
        worst = std::max(worst, defect / scale);
      }
      ok = worst <= 1e-10;
      out.report("MASS_BALANCE_KAPPA", ok, "max relative defect " + std::to_string(worst));
    }
    {
      bool ok = true;
      std::string why;
      // Synthetic oracle: dist = (1+t)^-1 must give theta = 1/3 exactly.
      std::vector<DiagnosticsRecord> synth(64);
      for (size_t i = 0; i < synth.size(); ++i) {
        synth[i].t = 0.1 * i;
        synth[i].dist_to_steady = 1.0 / (1.0 + synth[i].t);
      }
      const DecayFit sf = fit_decay(synth);
      if (std::abs(sf.theta_from_rate - 1.0 / 3.0) > 1e-12) {
        ok = false;
        why = "synthetic theta " + std::to_string(sf.theta_from_rate);
      }
      if (ok) {
        try {
          const SteadyState ss =
              solve_steady(mesh, ops, base, pots, base_run.final_state.u, 1e-12);
          fill_distances(base_run, mesh, ss.u);
          const DecayFit f1 = fit_decay(base_run.records);
          std::vector<DiagnosticsRecord> tail(
              base_run.records.begin() + static_cast<long>(base_run.records.size() / 4),
              base_run.records.end());
          const DecayFit f2 = fit_decay(tail);
          if (!(f1.theta_from_rate > 0.0 && f1.theta_from_rate <= 0.5)) {
            ok = false;
            why = "theta out of (0,1/2]";
          } else if (f1.rms_residual >= 0.1) {
            ok = false;
            why = "rms residual " + std::to_string(f1.rms_residual);
          } else if (std::abs(f1.theta_from_rate - f2.theta_from_rate) > 0.1) {
            ok = false;
            why = "window sensitivity " +
                  std::to_string(std::abs(f1.theta_from_rate - f2.theta_from_rate));
          }
        } catch (const Error& e) {
          ok = false;
          why = e.what();
        }
      }
      out.report("DECAY_FIT_STABLE", ok, why);
    }
    return out.all_pass ? kExitOk : kExitVerifyFail;
  } catch (const std::exception& e) {
    return map_exception(e);
  }
}

}  // namespace bsch
