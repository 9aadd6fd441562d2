#include "bsch/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace bsch {

double energy(const Mesh& mesh, const OperatorSet& ops, const PhasePair& u,
              const PotentialPair& pots) {
  if (pots.bulk.singular() && u.bulk.cwiseAbs().maxCoeff() >= 1.0)
    throw DomainError("energy evaluated at a pure state");
  double e = 0.5 * u.bulk.dot(ops.stiff_bulk * u.bulk);
  if (ops.stiff_surf.nonZeros() > 0)
    e += 0.5 * ops.chi * u.boundary.dot(ops.stiff_surf * u.boundary);
  for (int i = 0; i < mesh.num_bulk(); ++i) e += mesh.bulk_weights[i] * pots.bulk.F(u.bulk[i]);
  for (int b = 0; b < mesh.num_boundary(); ++b)
    e += mesh.boundary_weights[b] * pots.surf.F(u.boundary[b]);
  return e;
}

DiagnosticsRecord record(const State& state, const Mesh& mesh, const OperatorSet& ops,
                         const PotentialPair& pots, const ModelParams& params,
                         const State* prev, const PhasePair* steady_ref) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.mass = mean(mesh, state.u);
  r.total_mass_raw = r.mass * (mesh.omega_measure + mesh.gamma_measure);
  r.energy = energy(mesh, ops, state.u, pots);
  r.boundary_mu_integral = mesh.boundary_weights.dot(state.mu.boundary);
  r.separation =
      1.0 - std::max(state.u.bulk.cwiseAbs().maxCoeff(), state.u.boundary.cwiseAbs().maxCoeff());
  r.mu_mean = mean(mesh, state.mu);
  if (prev != nullptr && state.t > prev->t) {
    const double dt = state.t - prev->t;
    PhasePair du;
    du.bulk = (state.u.bulk - prev->u.bulk) / dt;
    du.boundary = (state.u.boundary - prev->u.boundary) / dt;
    // Permeable walls change the mean; project before taking the dual norm.
    const DualPair f = project(mesh, du);
    const double dn = dual_norm(ops, mesh, f);
    r.dissipation = dn * dn;
  } else {
    r.dissipation = 0.0;
  }
  if (steady_ref != nullptr) {
    PhasePair diff;
    diff.bulk = state.u.bulk - steady_ref->bulk;
    diff.boundary = state.u.boundary - steady_ref->boundary;
    r.dist_to_steady = norm_h(mesh, diff);
  } else {
    r.dist_to_steady = std::numeric_limits<double>::quiet_NaN();
  }
  (void)params;
  return r;
}

EnergyIdentityResult check_energy_identity(const std::vector<DiagnosticsRecord>& series,
                                           double kappa) {
  EnergyIdentityResult res;
  if (kappa > 0.0) {
    res.applicable = false;
    return res;
  }
  for (size_t i = 1; i < series.size(); ++i) {
    const double dt = series[i].t - series[i - 1].t;
    if (!(dt > 0.0)) continue;
    const double defect = std::abs((series[i].energy - series[i - 1].energy) / dt +
                                   series[i].dissipation) /
                          std::max(1.0, std::abs(series[i].energy));
    if (i == 1)
      res.first_step_defect = defect;
    else
      res.max_defect = std::max(res.max_defect, defect);
  }
  return res;
}

DecayFit fit_decay(const std::vector<DiagnosticsRecord>& series) {
  std::vector<std::pair<double, double>> pts;  // (t, dist)
  for (const auto& r : series) {
    if (std::isfinite(r.dist_to_steady)) pts.emplace_back(r.t, r.dist_to_steady);
  }
  if (pts.size() < 8) throw NotDecaying("too few records with a steady-state distance");

  double dist_max = 0.0;
  for (auto& [t, d] : pts) dist_max = std::max(dist_max, d);
  const double floor = std::max(1e-11 * dist_max, 1e-300);

  // Default window: trailing half, trimmed to the monotone part above the
  // noise floor.
  const double t_half = 0.5 * (pts.front().first + pts.back().first);
  size_t hi = pts.size();
  while (hi > 0 && pts[hi - 1].second <= floor) --hi;
  size_t lo = 0;
  while (lo < hi && pts[lo].first < t_half) ++lo;
  // Longest monotone suffix within [lo, hi).
  size_t start = hi > 0 ? hi - 1 : 0;
  while (start > lo && pts[start - 1].second >= pts[start].second * (1.0 - 1e-8) - 1e-15) --start;
  if (hi - start < pts.size() / 8 || hi - start < 5)
    throw NotDecaying("trajectory tail is not monotone beyond tolerance");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const size_t m = hi - start;
  for (size_t i = start; i < hi; ++i) {
    const double x = std::log1p(pts[i].first);
    const double y = std::log(std::max(pts[i].second, floor));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw NotDecaying("degenerate fit window");
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  if (slope >= 0.0) throw NotDecaying("tail distance is not decreasing");

  double rss = 0.0;
  for (size_t i = start; i < hi; ++i) {
    const double x = std::log1p(pts[i].first);
    const double y = std::log(std::max(pts[i].second, floor));
    const double e = y - (intercept + slope * x);
    rss += e * e;
  }

  DecayFit fit;
  const double s = std::abs(slope);
  fit.theta_from_rate = s / (1.0 + 2.0 * s);
  fit.prefactor = std::exp(intercept);
  fit.t_lo = pts[start].first;
  fit.t_hi = pts[hi - 1].first;
  fit.rms_residual = std::sqrt(rss / m);
  fit.clipped = fit.theta_from_rate > 0.49;
  return fit;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& series) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open diagnostics file for writing: " + path);
  out << "t,mass,total_mass_raw,energy,dissipation,boundary_mu_integral,separation,mu_mean,"
         "dist_to_steady\n";
  char line[320];
  for (const auto& r : series) {
    std::snprintf(line, sizeof(line),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mass,
                  r.total_mass_raw, r.energy, r.dissipation, r.boundary_mu_integral, r.separation,
                  r.mu_mean, r.dist_to_steady);
    out << line;
  }
}

void write_decay_fit(const std::string& path, const DecayFit& fit) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open decay fit file for writing: " + path);
  const double s = fit.theta_from_rate / (1.0 - 2.0 * fit.theta_from_rate);
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "slope = %.17g\ntheta_from_rate = %.17g\nprefactor = %.17g\n"
                "window_t_lo = %.17g\nwindow_t_hi = %.17g\nrms_residual = %.17g\nclipped = %d\n",
                -s, fit.theta_from_rate, fit.prefactor, fit.t_lo, fit.t_hi, fit.rms_residual,
                fit.clipped ? 1 : 0);
  out << buf;
  out << "# distance measured in the discrete H-norm\n";
}

}  // namespace bsch
