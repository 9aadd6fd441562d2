#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "bsch/mesh.hpp"

using namespace bsch;

TEST_CASE("interval mesh: weights and boundary measure") {
  const Mesh m = Mesh::interval(5, 1.0);
  // trapezoid weights by hand: h = 0.25
  CHECK(m.bulk_weights[0] == doctest::Approx(0.125));
  CHECK(m.bulk_weights[1] == doctest::Approx(0.25));
  CHECK(m.bulk_weights[4] == doctest::Approx(0.125));
  CHECK(m.bulk_weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.gamma_measure == doctest::Approx(2.0));
  CHECK(m.trace_map[0] == 0);
  CHECK(m.trace_map[1] == 4);
  CHECK_THROWS_AS(Mesh::interval(2, 1.0), ConfigError);
  CHECK_THROWS_AS(Mesh::interval(9, 0.0), ConfigError);
}

TEST_CASE("strip mesh: measures and trace geometry") {
  const Mesh m = Mesh::strip(8, 5, 2.0, 1.0);
  // oracle: tensor quadrature sums
  CHECK(m.bulk_weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.boundary_weights.sum() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(m.num_boundary() == 16);
  // injective trace map onto geometrically coincident nodes
  std::vector<int> seen;
  for (int b = 0; b < m.num_boundary(); ++b) {
    const int i = m.trace_map[b];
    CHECK(std::find(seen.begin(), seen.end(), i) == seen.end());
    seen.push_back(i);
    const double y = m.coord_y[i];
    CHECK((y == doctest::Approx(0.0) || y == doctest::Approx(1.0)));
  }
  CHECK_THROWS_AS(Mesh::strip(3, 5, 2.0, 1.0), ConfigError);
}

TEST_CASE("generalized mean") {
  const Mesh m = Mesh::interval(33, 1.0);
  CHECK(mean(m, constant_pair(m, 0.3)) == doctest::Approx(0.3).epsilon(1e-14));

  // u(x) = x with u_gamma = (0, 1): (1/2 + 1) / (1 + 2)
  PhasePair p = pair_from_bulk(m, m.coord_x);
  CHECK(mean(m, p) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("projection removes the mean and is idempotent") {
  const Mesh m = Mesh::strip(8, 6, 2.0, 1.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd z(m.num_bulk());
    for (int i = 0; i < m.num_bulk(); ++i) z[i] = uni(rng);
    const PhasePair p = pair_from_bulk(m, z);
    const DualPair q = project(m, p);
    CHECK(std::abs(mean(m, q)) <= 1e-13);
    const DualPair q2 = project(m, q);
    CHECK((q2.bulk - q.bulk).cwiseAbs().maxCoeff() <= 1e-13);
  }
  CHECK(project(m, constant_pair(m, 0.3)).bulk.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("quadrature exactness for affine fields") {
  // 1D: affine in x is integrated exactly by the trapezoid rule
  const Mesh m1 = Mesh::interval(17, 2.0);
  Eigen::VectorXd ax = 0.75 * m1.coord_x.array() - 0.2;
  const PhasePair p1 = pair_from_bulk(m1, ax);
  const double exact1 = (0.75 * 2.0 - 0.2 * 2.0 + (-0.2) + (0.75 * 2.0 - 0.2)) / (2.0 + 2.0);
  CHECK(mean(m1, p1) == doctest::Approx(exact1).epsilon(1e-13));

  // strip: affine in y, exact in the trapezoid direction; and a full period of
  // cos in x integrates to zero against the uniform weights
  const Mesh m2 = Mesh::strip(12, 7, 2.0, 1.0);
  Eigen::VectorXd ay(m2.num_bulk());
  for (int i = 0; i < m2.num_bulk(); ++i) ay[i] = 2.0 * m2.coord_y[i] - 0.5;
  const PhasePair p2 = pair_from_bulk(m2, ay);
  // bulk integral = (2*1/2 - 1/2)*|Omega| = 1; boundary: y=0 line -0.5*2, y=1 line 1.5*2
  const double exact2 = (1.0 + (-0.5 * 2.0 + 1.5 * 2.0)) / (2.0 + 4.0);
  CHECK(mean(m2, p2) == doctest::Approx(exact2).epsilon(1e-13));

  Eigen::VectorXd cx(m2.num_bulk());
  for (int i = 0; i < m2.num_bulk(); ++i) cx[i] = std::cos(M_PI * m2.coord_x[i]);
  CHECK(std::abs(mean(m2, pair_from_bulk(m2, cx))) <= 1e-13);
}

TEST_CASE("trace compatibility") {
  const Mesh m = Mesh::strip(6, 5, 1.0, 1.0);
  PhasePair p = constant_pair(m, 0.2);
  CHECK(trace_compatible(m, p));
  p.boundary[3] += 1e-6;
  CHECK_FALSE(trace_compatible(m, p, 1e-9));
  sync_trace(m, p);
  CHECK(trace_compatible(m, p));
}

TEST_CASE("snapshot round trip") {
  namespace fs = std::filesystem;
  const Mesh m = Mesh::interval(9, 1.0);
  Eigen::VectorXd z(m.num_bulk());
  for (int i = 0; i < m.num_bulk(); ++i) z[i] = std::sin(3.1 * i) * 0.9;
  const PhasePair p = pair_from_bulk(m, z);
  const std::string dir = fs::temp_directory_path() / "bsch_mesh_test";
  fs::create_directories(dir);
  write_snapshot(m, p, dir + "/snap.csv");
  write_boundary_snapshot(m, p, dir + "/snap_gamma.csv");
  const Eigen::VectorXd back = read_snapshot_bulk(m, dir + "/snap.csv");
  CHECK((back - z).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-16));
  const Mesh wrong = Mesh::interval(11, 1.0);
  CHECK_THROWS_AS(read_snapshot_bulk(wrong, dir + "/snap.csv"), ConfigError);
}
