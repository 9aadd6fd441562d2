#include "bsch/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bsch {

double Mesh::hx() const {
  if (kind == Kind::interval1d) return lx / (nx - 1);
  return lx / nx;  // periodic in x
}

double Mesh::hy() const {
  if (kind == Kind::interval1d) return 0.0;
  return ly / (ny - 1);
}

double Mesh::h_max() const { return std::max(hx(), hy()); }

Mesh Mesh::interval(int n, double length) {
  if (n < 4) throw ConfigError("mesh: interval node count must be >= 4, got " + std::to_string(n));
  if (!(length > 0.0)) throw ConfigError("mesh: interval length must be > 0");
  Mesh m;
  m.kind = Kind::interval1d;
  m.nx = n;
  m.ny = 1;
  m.lx = length;
  m.ly = 0.0;
  const double h = length / (n - 1);
  m.coord_x.resize(n);
  m.coord_y = Eigen::VectorXd::Zero(n);
  m.bulk_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    m.coord_x[i] = i * h;
    m.bulk_weights[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
  }
  // Two endpoint boundary nodes with the counting measure.
  m.boundary_weights = Eigen::VectorXd::Ones(2);
  m.trace_map = {0, n - 1};
  m.omega_measure = m.bulk_weights.sum();
  m.gamma_measure = m.boundary_weights.sum();
  return m;
}

Mesh Mesh::strip(int nx, int ny, double lx, double ly) {
  if (nx < 4 || ny < 4)
    throw ConfigError("mesh: strip node counts must be >= 4, got " + std::to_string(nx) + "x" +
                      std::to_string(ny));
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("mesh: strip side lengths must be > 0");
  Mesh m;
  m.kind = Kind::strip2d;
  m.nx = nx;
  m.ny = ny;
  m.lx = lx;
  m.ly = ly;
  const double hx = lx / nx;  // periodic direction: no duplicated node
  const double hy = ly / (ny - 1);
  const int n = nx * ny;
  m.coord_x.resize(n);
  m.coord_y.resize(n);
  m.bulk_weights.resize(n);
  for (int j = 0; j < ny; ++j) {
    const double wy = (j == 0 || j == ny - 1) ? 0.5 * hy : hy;
    for (int i = 0; i < nx; ++i) {
      const int k = m.index2d(i, j);
      m.coord_x[k] = i * hx;
      m.coord_y[k] = j * hy;
      m.bulk_weights[k] = hx * wy;
    }
  }
  // Boundary: the line y=0 then the line y=ly.
  m.boundary_weights = Eigen::VectorXd::Constant(2 * nx, hx);
  m.trace_map.resize(2 * nx);
  for (int i = 0; i < nx; ++i) {
    m.trace_map[i] = m.index2d(i, 0);
    m.trace_map[nx + i] = m.index2d(i, ny - 1);
  }
  m.omega_measure = m.bulk_weights.sum();
  m.gamma_measure = m.boundary_weights.sum();
  return m;
}

PhasePair pair_from_bulk(const Mesh& mesh, const Eigen::VectorXd& bulk) {
  PhasePair p;
  p.bulk = bulk;
  p.boundary.resize(mesh.num_boundary());
  for (int b = 0; b < mesh.num_boundary(); ++b) p.boundary[b] = bulk[mesh.trace_map[b]];
  return p;
}

PhasePair constant_pair(const Mesh& mesh, double value) {
  return pair_from_bulk(mesh, Eigen::VectorXd::Constant(mesh.num_bulk(), value));
}

void sync_trace(const Mesh& mesh, PhasePair& p) {
  p.boundary.resize(mesh.num_boundary());
  for (int b = 0; b < mesh.num_boundary(); ++b) p.boundary[b] = p.bulk[mesh.trace_map[b]];
}

bool trace_compatible(const Mesh& mesh, const PhasePair& p, double tol) {
  if (p.boundary.size() != mesh.num_boundary()) return false;
  for (int b = 0; b < mesh.num_boundary(); ++b) {
    if (std::abs(p.boundary[b] - p.bulk[mesh.trace_map[b]]) > tol) return false;
  }
  return true;
}

double inner_h(const Mesh& mesh, const Eigen::VectorXd& pb, const Eigen::VectorXd& pg,
               const Eigen::VectorXd& qb, const Eigen::VectorXd& qg) {
  const double bulk = (mesh.bulk_weights.array() * pb.array() * qb.array()).sum();
  const double surf = (mesh.boundary_weights.array() * pg.array() * qg.array()).sum();
  return bulk + surf;
}

double inner_h(const Mesh& mesh, const PhasePair& p, const PhasePair& q) {
  return inner_h(mesh, p.bulk, p.boundary, q.bulk, q.boundary);
}

double norm_h(const Mesh& mesh, const PhasePair& p) { return std::sqrt(inner_h(mesh, p, p)); }

double mean(const Mesh& mesh, const Eigen::VectorXd& bulk, const Eigen::VectorXd& boundary) {
  const double total = mesh.bulk_weights.dot(bulk) + mesh.boundary_weights.dot(boundary);
  return total / (mesh.omega_measure + mesh.gamma_measure);
}

double mean(const Mesh& mesh, const PhasePair& p) { return mean(mesh, p.bulk, p.boundary); }
double mean(const Mesh& mesh, const DualPair& f) { return mean(mesh, f.bulk, f.boundary); }

DualPair project(const Mesh& mesh, const PhasePair& p) {
  const double m = mean(mesh, p);
  DualPair out;
  out.bulk = p.bulk.array() - m;
  out.boundary = p.boundary.array() - m;
  return out;
}

DualPair project(const Mesh& mesh, const DualPair& f) {
  const double m = mean(mesh, f);
  DualPair out;
  out.bulk = f.bulk.array() - m;
  out.boundary = f.boundary.array() - m;
  return out;
}

void write_snapshot(const Mesh& mesh, const PhasePair& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open snapshot file for writing: " + path);
  out << "node_index,x,y,u\n";
  char line[128];
  for (int i = 0; i < mesh.num_bulk(); ++i) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", i, mesh.coord_x[i],
                  mesh.coord_y[i], p.bulk[i]);
    out << line;
  }
}

void write_boundary_snapshot(const Mesh& mesh, const PhasePair& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open snapshot file for writing: " + path);
  out << "boundary_index,x,u_gamma\n";
  char line[96];
  for (int b = 0; b < mesh.num_boundary(); ++b) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", b, mesh.coord_x[mesh.trace_map[b]],
                  p.boundary[b]);
    out << line;
  }
}

Eigen::VectorXd read_snapshot_bulk(const Mesh& mesh, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot file: " + path);
  std::string line;
  std::getline(in, line);  // header
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_bulk());
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    const int idx = std::stoi(tok);
    std::getline(ss, tok, ',');  // x
    std::getline(ss, tok, ',');  // y
    std::getline(ss, tok, ',');
    if (idx < 0 || idx >= mesh.num_bulk())
      throw ConfigError("snapshot node index out of range in " + path);
    u[idx] = std::stod(tok);
    ++count;
  }
  if (count != mesh.num_bulk())
    throw ConfigError("snapshot node count mismatch in " + path + ": expected " +
                      std::to_string(mesh.num_bulk()) + ", got " + std::to_string(count));
  return u;
}

}  // namespace bsch
