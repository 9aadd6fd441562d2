#include "bsch/operators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

namespace bsch {

namespace {

using Trip = Eigen::Triplet<double>;

void add_edge(std::vector<Trip>& t, int a, int b, double coeff) {
  t.emplace_back(a, a, coeff);
  t.emplace_back(b, b, coeff);
  t.emplace_back(a, b, -coeff);
  t.emplace_back(b, a, -coeff);
}

Eigen::SparseMatrix<double> bulk_stiffness(const Mesh& mesh) {
  const int n = mesh.num_bulk();
  std::vector<Trip> trips;
  if (mesh.kind == Mesh::Kind::interval1d) {
    const double h = mesh.hx();
    trips.reserve(4 * (n - 1));
    for (int i = 0; i + 1 < n; ++i) add_edge(trips, i, i + 1, 1.0 / h);
  } else {
    const double hx = mesh.hx(), hy = mesh.hy();
    const int nx = mesh.nx, ny = mesh.ny;
    trips.reserve(8 * n);
    for (int j = 0; j < ny; ++j) {
      // x-edges (periodic); edge area hx * wy with trapezoid wy
      const double wy = (j == 0 || j == ny - 1) ? 0.5 * hy : hy;
      const double cx = wy / hx;
      for (int i = 0; i < nx; ++i)
        add_edge(trips, mesh.index2d(i, j), mesh.index2d((i + 1) % nx, j), cx);
    }
    const double cy = hx / hy;
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i)
        add_edge(trips, mesh.index2d(i, j), mesh.index2d(i, j + 1), cy);
    }
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::SparseMatrix<double> surface_stiffness(const Mesh& mesh) {
  const int ng = mesh.num_boundary();
  Eigen::SparseMatrix<double> K(ng, ng);
  if (mesh.kind == Mesh::Kind::interval1d) return K;  // no intrinsic derivative
  const int nx = mesh.nx;
  const double hx = mesh.hx();
  std::vector<Trip> trips;
  trips.reserve(8 * nx);
  for (int line = 0; line < 2; ++line) {
    const int off = line * nx;
    for (int i = 0; i < nx; ++i) add_edge(trips, off + i, off + (i + 1) % nx, 1.0 / hx);
  }
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::SparseMatrix<double> beltrami_strong(const Mesh& mesh) {
  const int ng = mesh.num_boundary();
  Eigen::SparseMatrix<double> L(ng, ng);
  if (mesh.kind == Mesh::Kind::interval1d) return L;
  const int nx = mesh.nx;
  const double c = 1.0 / (mesh.hx() * mesh.hx());
  std::vector<Trip> trips;
  trips.reserve(6 * nx);
  for (int line = 0; line < 2; ++line) {
    const int off = line * nx;
    for (int i = 0; i < nx; ++i) {
      trips.emplace_back(off + i, off + i, -2.0 * c);
      trips.emplace_back(off + i, off + (i + 1) % nx, c);
      trips.emplace_back(off + i, off + (i + nx - 1) % nx, c);
    }
  }
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

Eigen::SparseMatrix<double> normal_derivative(const Mesh& mesh) {
  const int ng = mesh.num_boundary();
  const int n = mesh.num_bulk();
  Eigen::SparseMatrix<double> D(ng, n);
  std::vector<Trip> trips;
  if (mesh.kind == Mesh::Kind::interval1d) {
    const double h = mesh.hx();
    const int last = n - 1;
    // outward derivative: -u_x at the left end, +u_x at the right end
    trips.emplace_back(0, 0, 3.0 / (2.0 * h));
    trips.emplace_back(0, 1, -4.0 / (2.0 * h));
    trips.emplace_back(0, 2, 1.0 / (2.0 * h));
    trips.emplace_back(1, last, 3.0 / (2.0 * h));
    trips.emplace_back(1, last - 1, -4.0 / (2.0 * h));
    trips.emplace_back(1, last - 2, 1.0 / (2.0 * h));
  } else {
    const double hy = mesh.hy();
    const int nx = mesh.nx, ny = mesh.ny;
    for (int i = 0; i < nx; ++i) {
      // y = 0 line: outward normal is -y
      trips.emplace_back(i, mesh.index2d(i, 0), 3.0 / (2.0 * hy));
      trips.emplace_back(i, mesh.index2d(i, 1), -4.0 / (2.0 * hy));
      trips.emplace_back(i, mesh.index2d(i, 2), 1.0 / (2.0 * hy));
      // y = ly line: outward normal is +y
      trips.emplace_back(nx + i, mesh.index2d(i, ny - 1), 3.0 / (2.0 * hy));
      trips.emplace_back(nx + i, mesh.index2d(i, ny - 2), -4.0 / (2.0 * hy));
      trips.emplace_back(nx + i, mesh.index2d(i, ny - 3), 1.0 / (2.0 * hy));
    }
  }
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

// T' S T for a boundary matrix S, mapped onto bulk dofs via the trace map.
Eigen::SparseMatrix<double> pull_back(const Mesh& mesh, const Eigen::SparseMatrix<double>& S) {
  const int n = mesh.num_bulk();
  std::vector<Trip> trips;
  trips.reserve(S.nonZeros());
  for (int k = 0; k < S.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(S, k); it; ++it) {
      trips.emplace_back(mesh.trace_map[it.row()], mesh.trace_map[it.col()], it.value());
    }
  }
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

OperatorSet assemble_operators(const Mesh& mesh, double sigma, double chi) {
  if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
  if (!(chi > 0.0)) throw ConfigError("chi must be > 0");
  OperatorSet ops;
  ops.sigma = sigma;
  ops.chi = chi;
  ops.stiff_bulk = bulk_stiffness(mesh);
  ops.stiff_surf = surface_stiffness(mesh);
  ops.laplace_beltrami = beltrami_strong(mesh);
  ops.normal_deriv = normal_derivative(mesh);
  const Eigen::SparseMatrix<double> surf_on_bulk = pull_back(mesh, ops.stiff_surf);
  ops.a_sigma = ops.stiff_bulk + sigma * surf_on_bulk;
  ops.a_chi = ops.stiff_bulk + chi * surf_on_bulk;
  ops.a_sigma.makeCompressed();
  ops.a_chi.makeCompressed();

  ops.lumped_mass = mesh.bulk_weights;
  ops.boundary_lumped = Eigen::VectorXd::Zero(mesh.num_bulk());
  for (int b = 0; b < mesh.num_boundary(); ++b) {
    ops.lumped_mass[mesh.trace_map[b]] += mesh.boundary_weights[b];
    ops.boundary_lumped[mesh.trace_map[b]] += mesh.boundary_weights[b];
  }
  return ops;
}

double apply_a_sigma(const OperatorSet& ops, const PhasePair& p, const PhasePair& q) {
  double val = p.bulk.dot(ops.stiff_bulk * q.bulk);
  if (ops.sigma != 0.0 && ops.stiff_surf.nonZeros() > 0)
    val += ops.sigma * p.boundary.dot(ops.stiff_surf * q.boundary);
  return val;
}

DualPair solve_a_sigma_inverse(const OperatorSet& ops, const Mesh& mesh, const DualPair& f) {
  const double scale = std::max(1.0, f.bulk.cwiseAbs().maxCoeff());
  if (std::abs(mean(mesh, f)) > 1e-10 * scale)
    throw NonZeroMean("dual solve requires a zero-mean right-hand side");

  const int n = mesh.num_bulk();
  const double total_weight = mesh.omega_measure + mesh.gamma_measure;
  // Right-hand side of A w = M f on bulk dofs (boundary entries of f fold in
  // through the trace weights).
  Eigen::VectorXd b = mesh.bulk_weights.cwiseProduct(f.bulk);
  for (int k = 0; k < mesh.num_boundary(); ++k)
    b[mesh.trace_map[k]] += mesh.boundary_weights[k] * f.boundary[k];

  auto project_mean = [&](Eigen::VectorXd& v) {
    const double m = ops.lumped_mass.dot(v) / total_weight;
    v.array() -= m;
  };
  auto remove_constant = [&](Eigen::VectorXd& v) {
    const double s = v.sum() / n;
    v.array() -= s;
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  remove_constant(r);  // b is orthogonal to constants up to roundoff
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double b_norm = std::sqrt(rr);
  if (b_norm == 0.0) {
    DualPair out;
    out.bulk = Eigen::VectorXd::Zero(n);
    out.boundary = Eigen::VectorXd::Zero(mesh.num_boundary());
    return out;
  }
  const double tol = 1e-12 * b_norm;
  const int max_iter = 20 * n + 200;
  double best = b_norm;
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd Ap = ops.a_sigma * p;
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) throw SolverStall("dual solve lost positive definiteness");
    const double alpha = rr / pAp;
    w += alpha * p;
    r -= alpha * Ap;
    remove_constant(r);
    project_mean(w);
    const double rr_new = r.squaredNorm();
    const double rnorm = std::sqrt(rr_new);
    if (rnorm <= tol) {
      project_mean(w);
      DualPair out;
      out.bulk = w;
      out.boundary.resize(mesh.num_boundary());
      for (int k = 0; k < mesh.num_boundary(); ++k) out.boundary[k] = w[mesh.trace_map[k]];
      return out;
    }
    if (rnorm < 0.5 * best) {
      best = rnorm;
      stall = 0;
    } else if (++stall > 4 * n + 100) {
      throw SolverStall("dual solve residual stagnated at " + std::to_string(rnorm / b_norm));
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw SolverStall("dual solve exceeded the iteration budget");
}

double dual_norm(const OperatorSet& ops, const Mesh& mesh, const DualPair& f) {
  const DualPair w = solve_a_sigma_inverse(ops, mesh, f);
  const double val = inner_h(mesh, f.bulk, f.boundary, w.bulk, w.boundary);
  return std::sqrt(std::max(0.0, val));
}

double poincare_constant(const OperatorSet& ops, const Mesh& mesh, int trials,
                         std::uint64_t seed) {
  if (trials < 10) throw ConfigError("poincare estimate needs >= 10 trials");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = mesh.num_bulk();

  auto ratio = [&](const Eigen::VectorXd& z) {
    PhasePair p = pair_from_bulk(mesh, z);
    const double num = inner_h(mesh, p, p);
    const double den = apply_a_sigma(ops, p, p);
    return den > 0.0 ? num / den : 0.0;
  };

  double best = 0.0;
  Eigen::VectorXd best_z;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal(rng);
    PhasePair p = pair_from_bulk(mesh, z);
    const double m = mean(mesh, p);
    z.array() -= m;
    const double r = ratio(z);
    if (r > best) {
      best = r;
      best_z = z;
    }
  }
  // Inverse power refinement: z <- A^{-1} M z amplifies the top eigenpair of
  // the generalized problem M z = lambda A z on the zero-mean subspace.
  Eigen::VectorXd z = best_z;
  for (int it = 0; it < 50; ++it) {
    PhasePair p = pair_from_bulk(mesh, z);
    DualPair f = project(mesh, p);
    DualPair w = solve_a_sigma_inverse(ops, mesh, f);
    z = w.bulk;
    const double nz = z.norm();
    if (nz == 0.0) break;
    z /= nz;
    best = std::max(best, ratio(z));
  }
  return best;
}

Eigen::VectorXd apply_minus_laplacian(const OperatorSet& ops, const Mesh& mesh,
                                      const Eigen::VectorXd& u_bulk) {
  Eigen::VectorXd out = ops.stiff_bulk * u_bulk;
  // Boundary rows: split off the weighted normal derivative so that the
  // remainder is the (second-order consistent) Laplacian closure.
  Eigen::VectorXd dn = ops.normal_deriv * u_bulk;
  for (int b = 0; b < mesh.num_boundary(); ++b) {
    out[mesh.trace_map[b]] -= mesh.boundary_weights[b] * dn[b];
  }
  return out.cwiseQuotient(mesh.bulk_weights);
}

Eigen::VectorXd apply_normal_derivative(const OperatorSet& ops, const Eigen::VectorXd& u_bulk) {
  return ops.normal_deriv * u_bulk;
}

void dump_matrix(const Eigen::SparseMatrix<double>& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open matrix dump file: " + path);
  char line[96];
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      std::snprintf(line, sizeof(line), "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << line;
    }
  }
}

}  // namespace bsch
