#ifndef BSCH_MESH_HPP
#define BSCH_MESH_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bsch/errors.hpp"

namespace bsch {

// Discrete geometry for the bulk domain and its boundary. Two kinds:
//   Interval1D: uniform grid on (0,length); the boundary is the two endpoint
//               nodes carrying the counting measure, |Gamma| = 2.
//   Strip2D:    x-periodic strip (0,lx) x (0,ly); the boundary is the two
//               lines y = 0 and y = ly, |Gamma| = 2*lx.
// Boundary nodes share storage with their bulk images through trace_map, so
// the trace identity u_gamma = u|_Gamma is structural.
struct Mesh {
  enum class Kind { interval1d, strip2d };

  Kind kind = Kind::interval1d;
  int nx = 0;       // nodes along x (1D: total node count)
  int ny = 1;       // nodes along y (1D: 1)
  double lx = 0.0;  // length in x (1D: interval length)
  double ly = 0.0;  // length in y (1D: 0)

  Eigen::VectorXd coord_x;           // bulk node coordinates
  Eigen::VectorXd coord_y;
  Eigen::VectorXd bulk_weights;      // quadrature weights, sum = |Omega|
  Eigen::VectorXd boundary_weights;  // boundary weights, sum = |Gamma|
  std::vector<int> trace_map;        // boundary node -> bulk node index

  double omega_measure = 0.0;  // |Omega|
  double gamma_measure = 0.0;  // |Gamma|

  int num_bulk() const { return static_cast<int>(bulk_weights.size()); }
  int num_boundary() const { return static_cast<int>(boundary_weights.size()); }

  // Grid spacings. 1D meshes report hy = 0.
  double hx() const;
  double hy() const;
  // Largest spacing, used as the mesh-resolution tolerance scale.
  double h_max() const;

  int index2d(int i, int j) const { return j * nx + i; }

  static Mesh interval(int n, double length);
  static Mesh strip(int nx, int ny, double lx, double ly);
};

// Order-parameter pair (u, u_gamma): bulk field plus boundary trace field.
// Also reused for the chemical potential and for shifted fields.
struct PhasePair {
  Eigen::VectorXd bulk;
  Eigen::VectorXd boundary;
};

// Zero-mean pair representing a functional/right-hand side; same layout as
// PhasePair but with generalized mean zero.
struct DualPair {
  Eigen::VectorXd bulk;
  Eigen::VectorXd boundary;
};

// Builds the pair from a bulk vector, filling the boundary by trace.
PhasePair pair_from_bulk(const Mesh& mesh, const Eigen::VectorXd& bulk);
PhasePair constant_pair(const Mesh& mesh, double value);

// Refreshes p.boundary from p.bulk through trace_map.
void sync_trace(const Mesh& mesh, PhasePair& p);
bool trace_compatible(const Mesh& mesh, const PhasePair& p, double tol = 0.0);

// Combined bulk+boundary inner product and norm on pairs.
double inner_h(const Mesh& mesh, const Eigen::VectorXd& pb, const Eigen::VectorXd& pg,
               const Eigen::VectorXd& qb, const Eigen::VectorXd& qg);
double inner_h(const Mesh& mesh, const PhasePair& p, const PhasePair& q);
double norm_h(const Mesh& mesh, const PhasePair& p);

// Generalized mean m(z) = (int_Omega z + int_Gamma z_gamma) / (|Omega|+|Gamma|).
double mean(const Mesh& mesh, const PhasePair& p);
double mean(const Mesh& mesh, const DualPair& f);
double mean(const Mesh& mesh, const Eigen::VectorXd& bulk, const Eigen::VectorXd& boundary);

// P z = z - m(z) 1.
DualPair project(const Mesh& mesh, const PhasePair& p);
DualPair project(const Mesh& mesh, const DualPair& f);

// Field snapshot CSV: columns node_index,x,y,u. Boundary snapshot CSV:
// columns boundary_index,x,u_gamma.
void write_snapshot(const Mesh& mesh, const PhasePair& p, const std::string& path);
void write_boundary_snapshot(const Mesh& mesh, const PhasePair& p, const std::string& path);
Eigen::VectorXd read_snapshot_bulk(const Mesh& mesh, const std::string& path);

}  // namespace bsch

#endif
