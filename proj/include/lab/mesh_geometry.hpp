#ifndef LAB_MESH_GEOMETRY_HPP
#define LAB_MESH_GEOMETRY_HPP

#include <cmath>
#include <vector>

#include "lab/tri_mesh.hpp"

namespace lab {

inline double mesh_area(const TriMesh& m) {
  double a = 0;
  for (const auto& f : m.F)
    a += 0.5 * (m.V[f[1]] - m.V[f[0]]).cross(m.V[f[2]] - m.V[f[0]]).norm();
  return a;
}

// P1 (cotangent) Dirichlet energy of a vertex field.
inline double mesh_dirichlet_energy(const TriMesh& m, const std::vector<double>& phi) {
  double acc = 0;
  for (const auto& f : m.F) {
    Eigen::Vector3d p0 = m.V[f[0]], p1 = m.V[f[1]], p2 = m.V[f[2]];
    Eigen::Vector3d n = (p1 - p0).cross(p2 - p0);
    double area2 = n.norm();
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    const Eigen::Vector3d* P[3] = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      // grad of the hat at vertex k: (unit normal x opposite edge) / (2 area)
      Eigen::Vector3d edge = *P[(k + 2) % 3] - *P[(k + 1) % 3];
      grad += phi[f[k]] * n.cross(edge) / (area2 * area2);
    }
    acc += 0.5 * area2 * grad.squaredNorm();
  }
  return acc;
}

// Discrete exterior turning angle at a boundary vertex, the mesh convention
// for the geodesic curvature density of the boundary.
inline double boundary_turning_angle(const MeshData& d, int v) {
  return std::numbers::pi - d.angle_sum[v];
}

// first variation of area for X = phi nu:  int H phi dA  (boundary co-normal
// term vanishes since eta is tangent and nu normal).
inline double mesh_first_variation_normal(const TriMesh& m, const MeshData& d,
                                          const std::vector<double>& phi) {
  double acc = 0;
  for (size_t v = 0; v < m.V.size(); ++v) acc += d.H[v] * phi[v] * d.area[v];
  return acc;
}

// normal second variation int |grad phi|^2 - (Ric(nu) + |B|^2) phi^2 minus the
// free-boundary A(nu,nu) term; the ambient is flat R^3 with a planar support
// so both Ric and A vanish.  Returns (value, boundary term = 0).
inline std::pair<double, double> mesh_second_variation_normal(
    const TriMesh& m, const MeshData& d, const std::vector<double>& phi,
    double minimal_tol) {
  double maxH = 0;
  for (size_t v = 0; v < m.V.size(); ++v)
    if (d.area[v] > 0) maxH = std::max(maxH, std::abs(d.H[v]));
  if (maxH > minimal_tol)
    throw NotMinimal("mesh max |H| = " + std::to_string(maxH));
  double grad2 = mesh_dirichlet_energy(m, phi);
  double curv = 0;
  for (size_t v = 0; v < m.V.size(); ++v) curv += d.B_norm2[v] * sq(phi[v]) * d.area[v];
  return {grad2 - curv, 0.0};
}

// area of the straight flow x -> x + t phi nu
inline double mesh_flowed_area(const TriMesh& m, const MeshData& d,
                               const std::vector<double>& phi, double t) {
  TriMesh flowed = m;
  for (size_t v = 0; v < m.V.size(); ++v) flowed.V[v] += t * phi[v] * d.normal[v];
  return mesh_area(flowed);
}

inline double mesh_fd_area_variation(const TriMesh& m, const MeshData& d,
                                     const std::vector<double>& phi, int order,
                                     std::vector<double> steps = {1e-2, 1e-3}) {
  if (steps.size() < 2) steps.push_back(steps.front() / 10.0);
  double A0 = mesh_area(m);
  std::vector<double> D;
  for (double t : steps) {
    double Ap = mesh_flowed_area(m, d, phi, t);
    double Am = mesh_flowed_area(m, d, phi, -t);
    D.push_back(order == 1 ? (Ap - Am) / (2 * t) : (Ap - 2 * A0 + Am) / (t * t));
  }
  if (D.size() >= 3) {
    double d1 = std::abs(D[1] - D[0]), d2 = std::abs(D[2] - D[1]);
    if (d2 > d1 * 1.5 + 1e-12)
      throw StepTooLargeForStencil("finite-difference sequence not contracting");
  }
  double tc = steps[steps.size() - 2], tf = steps.back();
  double Dc = D[D.size() - 2], Df = D.back();
  return (Df * tc * tc - Dc * tf * tf) / (tc * tc - tf * tf);
}

}  // namespace lab

#endif  // LAB_MESH_GEOMETRY_HPP
