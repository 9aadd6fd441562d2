#ifndef BSCH_OPERATORS_HPP
#define BSCH_OPERATORS_HPP

#include <Eigen/Sparse>
#include <cstdint>

#include "bsch/mesh.hpp"

namespace bsch {

// Discrete differential operators for one mesh and one (sigma, chi) pair,
// assembled once and shared read-only afterwards.
//
// stiff_bulk is the weak-form Dirichlet integral on bulk nodes; stiff_surf the
// analogous periodic form along the boundary lines (zero matrix in 1D, where
// the boundary carries no intrinsic derivative). a_sigma/a_chi collapse both
// onto bulk unknowns through the trace map:
//   a_sigma(p, q) = p' (stiff_bulk + sigma T' stiff_surf T) q.
// normal_deriv is the outward derivative at boundary nodes by a one-sided
// 3-point second-order stencil. lumped_mass combines bulk quadrature weights
// with the boundary weights at trace nodes, so p' lumped_mass-weighted q is
// the combined bulk+boundary inner product on trace-compatible pairs.
struct OperatorSet {
  double sigma = 0.0;
  double chi = 1.0;

  Eigen::SparseMatrix<double> stiff_bulk;       // N x N
  Eigen::SparseMatrix<double> stiff_surf;       // NG x NG
  Eigen::SparseMatrix<double> laplace_beltrami; // NG x NG, strong form
  Eigen::SparseMatrix<double> normal_deriv;     // NG x N
  Eigen::SparseMatrix<double> a_sigma;          // N x N
  Eigen::SparseMatrix<double> a_chi;            // N x N

  Eigen::VectorXd lumped_mass;       // N: bulk weight + boundary weight at traces
  Eigen::VectorXd boundary_lumped;   // N: boundary weight at traces, 0 elsewhere
};

OperatorSet assemble_operators(const Mesh& mesh, double sigma, double chi);

// a_sigma(p, q): symmetric, >= 0 on the diagonal, kernel = constants.
double apply_a_sigma(const OperatorSet& ops, const PhasePair& p, const PhasePair& q);

// Solves a_sigma(w, z) = (f, z)_H for all zero-mean z, returning the zero-mean
// w. Conjugate gradients on the mean-zero subspace, re-projected every
// iteration, to relative residual 1e-12. Throws NonZeroMean when m(f) exceeds
// 1e-10 and SolverStall on stagnation.
DualPair solve_a_sigma_inverse(const OperatorSet& ops, const Mesh& mesh, const DualPair& f);

// sqrt((f, A_sigma^{-1} f)): the dual norm driving the energy identity.
double dual_norm(const OperatorSet& ops, const Mesh& mesh, const DualPair& f);

// Empirical constant of ||z||_H^2 <= C ||z||_{V_sigma,0}^2: running max over
// random zero-mean trial pairs plus an inverse power refinement.
double poincare_constant(const OperatorSet& ops, const Mesh& mesh, int trials,
                         std::uint64_t seed = 2024);

// Strong-form operators used by diagnostics and tests. The boundary rows of
// the Laplacian are closed so that the discrete Green identity
//   a_0(u, w) = (w, -lap u)_Omega + int_Gamma w dnu(u)
// holds exactly with the 3-point normal derivative.
Eigen::VectorXd apply_minus_laplacian(const OperatorSet& ops, const Mesh& mesh,
                                      const Eigen::VectorXd& u_bulk);
Eigen::VectorXd apply_normal_derivative(const OperatorSet& ops, const Eigen::VectorXd& u_bulk);

// Debug dump in "row col value" coordinate text format.
void dump_matrix(const Eigen::SparseMatrix<double>& m, const std::string& path);

}  // namespace bsch

#endif
