#ifndef LAB_MESH_SHAPES_HPP
#define LAB_MESH_SHAPES_HPP

#include <cmath>
#include <functional>
#include <numbers>

#include "lab/tri_mesh.hpp"

namespace lab {

namespace meshdetail {

// structured parameter-rectangle mesh; wrap_u closes the band
inline TriMesh parametric_grid(const std::function<Eigen::Vector3d(double, double)>& P,
                               double u0, double u1, double v0, double v1, int nu, int nv,
                               bool wrap_u, EdgeLabel u_edges, EdgeLabel v_edges) {
  TriMesh m;
  const int ucount = wrap_u ? nu : nu + 1;
  auto vid = [&](int i, int j) { return (i % ucount) * (nv + 1) + j; };
  for (int i = 0; i < ucount; ++i)
    for (int j = 0; j <= nv; ++j) {
      double u = u0 + (u1 - u0) * i / nu;
      double v = v0 + (v1 - v0) * j / nv;
      m.V.push_back(P(u, v));
    }
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      // split along alternating diagonals for symmetry
      if ((i + j) % 2 == 0) {
        m.F.push_back({a, b, c});
        m.F.push_back({a, c, d});
      } else {
        m.F.push_back({a, b, d});
        m.F.push_back({b, c, d});
      }
    }
  auto label = [&](int a, int b, EdgeLabel l) {
    m.labels[{std::min(a, b), std::max(a, b)}] = l;
  };
  for (int i = 0; i < nu; ++i) {
    label(vid(i, 0), vid(i + 1, 0), v_edges);
    label(vid(i, nv), vid(i + 1, nv), v_edges);
  }
  if (!wrap_u)
    for (int j = 0; j < nv; ++j) {
      label(vid(0, j), vid(0, j + 1), u_edges);
      label(vid(nu, j), vid(nu, j + 1), u_edges);
    }
  return m;
}

}  // namespace meshdetail

// Half catenoid (cosh v cos u, cosh v sin u, v), u in [0, pi]: free boundary
// on the plane {x2 = 0}, fixed rings at v = +-vmax.  Four corners.
inline TriMesh half_catenoid_mesh(double vmax, int nu, int nv) {
  auto P = [](double u, double v) {
    return Eigen::Vector3d(std::cosh(v) * std::cos(u), std::cosh(v) * std::sin(u), v);
  };
  return meshdetail::parametric_grid(P, 0.0, std::numbers::pi, -vmax, vmax, nu, nv,
                                     /*wrap_u=*/false, EdgeLabel::Free, EdgeLabel::Fixed);
}

// Full catenoid band, closed in u; fixed rings only.
inline TriMesh catenoid_band_mesh(double vmax, int nu, int nv) {
  auto P = [](double u, double v) {
    return Eigen::Vector3d(std::cosh(v) * std::cos(u), std::cosh(v) * std::sin(u), v);
  };
  return meshdetail::parametric_grid(P, 0.0, 2.0 * std::numbers::pi, -vmax, vmax, nu, nv,
                                     /*wrap_u=*/true, EdgeLabel::Fixed, EdgeLabel::Fixed);
}

// Spherical cap of opening angle `alpha` on the unit sphere (pole fan plus
// rings); fixed boundary circle.
inline TriMesh spherical_cap_mesh(double alpha, int rings, int sectors) {
  TriMesh m;
  m.V.push_back(Eigen::Vector3d(0, 0, 1));
  for (int r = 1; r <= rings; ++r) {
    double th = alpha * r / rings;
    for (int s = 0; s < sectors; ++s) {
      double ph = 2.0 * std::numbers::pi * s / sectors;
      m.V.push_back(Eigen::Vector3d(std::sin(th) * std::cos(ph),
                                    std::sin(th) * std::sin(ph), std::cos(th)));
    }
  }
  auto vid = [&](int r, int s) { return 1 + (r - 1) * sectors + (s % sectors); };
  for (int s = 0; s < sectors; ++s) m.F.push_back({0, vid(1, s), vid(1, s + 1)});
  for (int r = 1; r < rings; ++r)
    for (int s = 0; s < sectors; ++s) {
      int a = vid(r, s), b = vid(r, s + 1), c = vid(r + 1, s + 1), d = vid(r + 1, s);
      m.F.push_back({a, d, c});
      m.F.push_back({a, c, b});
    }
  for (int s = 0; s < sectors; ++s) {
    int a = vid(rings, s), b = vid(rings, s + 1);
    m.labels[{std::min(a, b), std::max(a, b)}] = EdgeLabel::Fixed;
  }
  return m;
}

// Flat half disk {x^2 + y^2 <= R^2, y >= 0}: fixed half circle, free
// diameter, two right-angle corners.
inline TriMesh half_disk_mesh(double R, int rings, int sectors) {
  TriMesh m;
  m.V.push_back(Eigen::Vector3d(0, 0, 0));
  for (int r = 1; r <= rings; ++r) {
    double rr = R * r / rings;
    for (int s = 0; s <= sectors; ++s) {
      double ph = std::numbers::pi * s / sectors;
      m.V.push_back(Eigen::Vector3d(rr * std::cos(ph), rr * std::sin(ph), 0));
    }
  }
  auto vid = [&](int r, int s) { return 1 + (r - 1) * (sectors + 1) + s; };
  for (int s = 0; s < sectors; ++s) m.F.push_back({0, vid(1, s), vid(1, s + 1)});
  for (int r = 1; r < rings; ++r)
    for (int s = 0; s < sectors; ++s) {
      int a = vid(r, s), b = vid(r, s + 1), c = vid(r + 1, s + 1), d = vid(r + 1, s);
      m.F.push_back({a, d, c});
      m.F.push_back({a, c, b});
    }
  auto label = [&](int a, int b, EdgeLabel l) {
    m.labels[{std::min(a, b), std::max(a, b)}] = l;
  };
  for (int s = 0; s < sectors; ++s) label(vid(rings, s), vid(rings, s + 1), EdgeLabel::Fixed);
  // the free diameter: spokes at ph = 0 and ph = pi
  label(0, vid(1, 0), EdgeLabel::Free);
  label(0, vid(1, sectors), EdgeLabel::Free);
  for (int r = 1; r < rings; ++r) {
    label(vid(r, 0), vid(r + 1, 0), EdgeLabel::Free);
    label(vid(r, sectors), vid(r + 1, sectors), EdgeLabel::Free);
  }
  return m;
}

}  // namespace lab

#endif  // LAB_MESH_SHAPES_HPP
