#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lab/mesh_geometry.hpp"
#include "lab/mesh_shapes.hpp"
#include "lab/tri_mesh.hpp"

using namespace lab;
using Catch::Approx;

TEST_CASE("gauss-bonnet with corners is a discrete identity") {
  SECTION("flat half disk: chi = 1, two right-angle corners") {
    TriMesh m = half_disk_mesh(2.0, 12, 24);
    REQUIRE(m.euler_characteristic() == 1);
    REQUIRE(gauss_bonnet_defect(m) < 1e-10);
    MeshData d = analyze_mesh(m);
    int corners = 0;
    for (size_t v = 0; v < m.V.size(); ++v)
      if (d.corner[v]) {
        ++corners;
        REQUIRE(d.angle_sum[v] == Approx(std::numbers::pi / 2).margin(0.1));  // discrete corner
      }
    REQUIRE(corners == 2);
  }
  SECTION("spherical cap: chi = 1") {
    TriMesh m = spherical_cap_mesh(1.0, 14, 28);
    REQUIRE(m.euler_characteristic() == 1);
    REQUIRE(gauss_bonnet_defect(m) < 1e-10);
  }
  SECTION("half catenoid: chi = 1 with four corners") {
    TriMesh m = half_catenoid_mesh(1.2, 24, 20);
    REQUIRE(m.euler_characteristic() == 1);
    REQUIRE(gauss_bonnet_defect(m) < 1e-10);
    MeshData d = analyze_mesh(m);
    int corners = 0;
    for (size_t v = 0; v < m.V.size(); ++v) corners += d.corner[v];
    REQUIRE(corners == 4);
  }
  SECTION("closed band: chi = 0") {
    TriMesh m = catenoid_band_mesh(1.0, 32, 12);
    REQUIRE(m.euler_characteristic() == 0);
    REQUIRE(gauss_bonnet_defect(m) < 1e-10);
  }
}

TEST_CASE("unit sphere cap has H = 2 under the sum convention") {
  double prev = 0;
  int k = 0;
  for (int res : {10, 20, 40}) {
    TriMesh m = spherical_cap_mesh(0.9, res, 2 * res);
    MeshData d = analyze_mesh(m);
    // probe an interior ring vertex
    int v = 1 + (res / 2) * 2 * res + 3;
    double err = std::abs(d.H[v] - 2.0);
    if (k++ > 0) REQUIRE(err < 0.6 * prev);
    prev = err;
  }
  REQUIRE(prev < 2e-3);
}

TEST_CASE("half catenoid is discretely minimal with planar free boundary") {
  auto interior_maxH = [](const TriMesh& mm, const MeshData& dd) {
    double mx = 0;
    for (size_t v = 0; v < mm.V.size(); ++v)
      if (!dd.on_boundary[v]) mx = std::max(mx, std::abs(dd.H[v]));
    return mx;
  };
  TriMesh coarse = half_catenoid_mesh(1.2, 48, 40);
  double mh_coarse = interior_maxH(coarse, analyze_mesh(coarse));
  TriMesh m = half_catenoid_mesh(1.2, 96, 80);
  MeshData d = analyze_mesh(m);
  double maxH = interior_maxH(m, d);
  REQUIRE(maxH < 0.6 * mh_coarse);  // near-boundary fits dominate at O(h)
  REQUIRE(maxH < 0.02);
  double maxRes = 0;
  // boundary decomposition on the free edge: H_dM = H_dSigma = A(nu,nu) = 0
  for (size_t v = 0; v < m.V.size(); ++v) {
    if (!d.on_boundary[v] || d.corner[v]) continue;
    bool on_free = std::abs(m.V[v][1]) < 1e-12;
    if (!on_free) continue;
    double H_dM = 0.0, A_nunu = 0.0;                      // flat supporting plane
    double H_dS = boundary_turning_angle(d, v);           // turning angle density
    maxRes = std::max(maxRes, std::abs(H_dM - H_dS - A_nunu));
  }
  REQUIRE(maxRes < 5e-3);
  // free-boundary orthogonality: the surface normal lies in the plane
  for (size_t v = 0; v < m.V.size(); ++v)
    if (d.on_boundary[v] && std::abs(m.V[v][1]) < 1e-12 && !d.corner[v])
      REQUIRE(std::abs(d.normal[v][1]) < 5e-3);
}

TEST_CASE("first variation of the cap against the analytic value") {
  TriMesh m = spherical_cap_mesh(0.9, 40, 80);
  MeshData d = analyze_mesh(m);
  std::vector<double> one(m.V.size(), 1.0);
  double dv = mesh_first_variation_normal(m, d, one);
  // int H dA = 2 * area for the unit sphere
  REQUIRE(dv == Approx(2.0 * mesh_area(m)).epsilon(0.01));
  double oracle = mesh_fd_area_variation(m, d, one, 1, {1e-3, 1e-4});
  REQUIRE(dv == Approx(oracle).epsilon(0.02));  // two independent discretizations
}

TEST_CASE("half catenoid second variation matches the area oracle") {
  TriMesh m = half_catenoid_mesh(1.2, 96, 80);
  MeshData d = analyze_mesh(m);
  std::vector<double> phi(m.V.size());
  for (size_t v = 0; v < m.V.size(); ++v) {
    double z = m.V[v][2];
    double s = (z + 1.2) / 2.4;
    phi[v] = sq(std::sin(std::numbers::pi * s));
  }
  auto [formula, bterm] = mesh_second_variation_normal(m, d, phi, 1e-1);
  double oracle = mesh_fd_area_variation(m, d, phi, 2, {1e-2, 1e-3});
  REQUIRE(bterm == 0.0);
  REQUIRE(formula == Approx(oracle).epsilon(5e-3));
}

TEST_CASE("wide catenoid band with unit core profile is unstable") {
  TriMesh m = catenoid_band_mesh(2.2, 96, 72);
  MeshData d = analyze_mesh(m);
  std::vector<double> phi(m.V.size());
  for (size_t v = 0; v < m.V.size(); ++v) {
    double z = m.V[v][2];
    double s = (z + 2.2) / 4.4;
    phi[v] = std::min(1.0, 4.0 * std::min(s, 1.0 - s));  // 1 on the core
  }
  auto [formula, bterm] = mesh_second_variation_normal(m, d, phi, 1e-1);
  (void)bterm;
  REQUIRE(formula < 0.0);
  double oracle = mesh_fd_area_variation(m, d, phi, 2, {1e-2, 1e-3});
  REQUIRE(oracle < 0.0);
}

TEST_CASE("off roundtrip with labels") {
  TriMesh m = half_disk_mesh(1.0, 4, 8);
  std::stringstream off, lab;
  write_off(m, off);
  write_labels(m, lab);
  TriMesh back = read_off(off, &lab);
  REQUIRE(back.V.size() == m.V.size());
  REQUIRE(back.F.size() == m.F.size());
  REQUIRE(back.labels == m.labels);
  REQUIRE(gauss_bonnet_defect(back) < 1e-10);
}

TEST_CASE("non-manifold input is rejected") {
  TriMesh m;
  m.V = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  m.F = {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};  // edge (0,1) in three faces
  REQUIRE_THROWS_AS(analyze_mesh(m), NonManifoldMesh);
}
