#ifndef LAB_TRI_MESH_HPP
#define LAB_TRI_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "lab/common.hpp"

namespace lab {

enum class EdgeLabel { Fixed, Free };

// Triangulated surface with boundary in R^3.  Boundary edges carry a
// Fixed/Free label; corners are vertices meeting both labels.
struct TriMesh {
  std::vector<Eigen::Vector3d> V;
  std::vector<std::array<int, 3>> F;
  std::map<std::pair<int, int>, EdgeLabel> labels;  // boundary edges, v0 < v1

  int euler_characteristic() const {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : F)
      for (int e = 0; e < 3; ++e) {
        int a = f[e], b = f[(e + 1) % 3];
        edges[{std::min(a, b), std::max(a, b)}]++;
      }
    return static_cast<int>(V.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(F.size());
  }
};

// Per-vertex discrete geometry.
struct MeshData {
  std::vector<Eigen::Vector3d> normal;      // angle-weighted vertex normals
  std::vector<double> area;                 // mixed Voronoi areas
  std::vector<double> angle_sum;            // total incident angle
  std::vector<bool> on_boundary;
  std::vector<bool> corner;                 // boundary vertex meeting both labels
  std::vector<Eigen::Matrix3d> shape;       // tangent-plane shape operator
  std::vector<double> H;                    // trace of the shape operator
  std::vector<double> B_norm2;              // squared Frobenius norm
  std::vector<std::vector<int>> boundary_neighbors;
  double mean_edge = 0;
};

namespace meshdetail {

inline double angle_at(const Eigen::Vector3d& p, const Eigen::Vector3d& q,
                       const Eigen::Vector3d& r) {
  Eigen::Vector3d u = q - p, v = r - p;
  double c = u.dot(v) / (u.norm() * v.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace meshdetail

inline MeshData analyze_mesh(const TriMesh& m) {
  const int nv = static_cast<int>(m.V.size());
  MeshData d;
  d.normal.assign(nv, Eigen::Vector3d::Zero());
  d.area.assign(nv, 0.0);
  d.angle_sum.assign(nv, 0.0);
  d.on_boundary.assign(nv, false);
  d.corner.assign(nv, false);
  d.shape.assign(nv, Eigen::Matrix3d::Zero());
  d.H.assign(nv, 0.0);
  d.B_norm2.assign(nv, 0.0);
  d.boundary_neighbors.assign(nv, {});

  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int fi = 0; fi < static_cast<int>(m.F.size()); ++fi) {
    const auto& f = m.F[fi];
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      edge_faces[{std::min(a, b), std::max(a, b)}].push_back(fi);
    }
  }
  double esum = 0;
  for (const auto& [e, fs] : edge_faces) {
    if (fs.size() > 2) throw NonManifoldMesh("edge shared by more than two faces");
    esum += (m.V[e.first] - m.V[e.second]).norm();
    if (fs.size() == 1) {
      d.on_boundary[e.first] = d.on_boundary[e.second] = true;
      d.boundary_neighbors[e.first].push_back(e.second);
      d.boundary_neighbors[e.second].push_back(e.first);
    }
  }
  d.mean_edge = esum / edge_faces.size();

  // angle-weighted normals, angle sums, mixed Voronoi areas
  for (const auto& f : m.F) {
    Eigen::Vector3d p0 = m.V[f[0]], p1 = m.V[f[1]], p2 = m.V[f[2]];
    Eigen::Vector3d fn = (p1 - p0).cross(p2 - p0);
    double a2 = fn.norm();
    if (a2 <= 0) throw NonManifoldMesh("degenerate triangle");
    double tri_area = 0.5 * a2;
    fn /= a2;
    double ang[3] = {meshdetail::angle_at(p0, p1, p2), meshdetail::angle_at(p1, p2, p0),
                     meshdetail::angle_at(p2, p0, p1)};
    for (int k = 0; k < 3; ++k) {
      d.normal[f[k]] += ang[k] * fn;
      d.angle_sum[f[k]] += ang[k];
    }
    // mixed Voronoi (Meyer et al. style)
    bool obtuse = ang[0] > std::numbers::pi / 2 || ang[1] > std::numbers::pi / 2 ||
                  ang[2] > std::numbers::pi / 2;
    for (int k = 0; k < 3; ++k) {
      if (!obtuse) {
        const Eigen::Vector3d &p = m.V[f[k]], &q = m.V[f[(k + 1) % 3]],
                              &r = m.V[f[(k + 2) % 3]];
        double cot_q = 1.0 / std::tan(ang[(k + 1) % 3]);
        double cot_r = 1.0 / std::tan(ang[(k + 2) % 3]);
        d.area[f[k]] += ((r - p).squaredNorm() * cot_q + (q - p).squaredNorm() * cot_r) / 8.0;
      } else {
        d.area[f[k]] += (ang[k] > std::numbers::pi / 2) ? tri_area / 2.0 : tri_area / 4.0;
      }
    }
  }
  for (auto& nrm : d.normal) nrm.normalize();

  // shape operator by local quadric fit: height over the vertex tangent
  // frame from the two-ring neighborhood, z ~ p x + q y + (a x^2 + 2b xy +
  // c y^2)/2, then the graph formulas at the origin.
  std::vector<std::vector<int>> ring(nv);
  {
    std::vector<std::map<int, bool>> nb(nv);
    for (const auto& f : m.F)
      for (int e = 0; e < 3; ++e) {
        nb[f[e]][f[(e + 1) % 3]] = true;
        nb[f[e]][f[(e + 2) % 3]] = true;
      }
    for (int v = 0; v < nv; ++v) {
      std::map<int, bool> two = nb[v];
      for (const auto& [u, _] : nb[v])
        for (const auto& [w2, __] : nb[u]) two[w2] = true;
      two.erase(v);
      for (const auto& [u, _] : two) ring[v].push_back(u);
    }
  }
  // two passes: the second refits in the frame of the corrected normal,
  // which is second-order accurate even on irregular vertex stars
  for (int pass = 0; pass < 2; ++pass) {
    for (int v = 0; v < nv; ++v) {
      if (ring[v].size() < 5 || d.normal[v].norm() < 0.5) continue;
      Eigen::Vector3d nrm = d.normal[v];
      Eigen::Vector3d t1 = nrm.unitOrthogonal();
      Eigen::Vector3d t2 = nrm.cross(t1);
      const int rows = static_cast<int>(ring[v].size());
      Mat Xm(rows, 5);
      Vec z(rows);
      for (int k = 0; k < rows; ++k) {
        Eigen::Vector3d q = m.V[ring[v][k]] - m.V[v];
        double x = q.dot(t1), y = q.dot(t2);
        Xm(k, 0) = x;
        Xm(k, 1) = y;
        Xm(k, 2) = 0.5 * x * x;
        Xm(k, 3) = x * y;
        Xm(k, 4) = 0.5 * y * y;
        z[k] = q.dot(nrm);
      }
      Vec beta = (Xm.transpose() * Xm).ldlt().solve(Xm.transpose() * z);
      double p = beta[0], q = beta[1];
      double W = std::sqrt(1.0 + p * p + q * q);
      Eigen::Vector3d fitted = (nrm - p * t1 - q * t2) / W;
      d.normal[v] = fitted.normalized();
      if (pass == 0) continue;
      Eigen::Matrix2d II, I;
      // B(X,Y) = <nabla_X nu, Y> = -hess/W for a height graph over the frame
      II << -beta[2], -beta[3], -beta[3], -beta[4];
      II /= W;
      I << 1 + p * p, p * q, p * q, 1 + q * q;
      Eigen::Matrix2d S = I.inverse() * II;
      d.H[v] = S.trace();
      d.B_norm2[v] = sq(S.trace()) - 2.0 * S.determinant();
      Eigen::Matrix3d S3 = Eigen::Matrix3d::Zero();
      S3.topLeftCorner<2, 2>() = S;
      Eigen::Matrix3d frame;
      frame.col(0) = t1;
      frame.col(1) = t2;
      frame.col(2) = nrm;
      d.shape[v] = frame * S3 * frame.transpose();
    }
  }

  for (const auto& [e, lab] : m.labels) {
    (void)lab;
    if (!edge_faces.count(e) || edge_faces[e].size() != 1)
      throw NonManifoldMesh("label on a non-boundary edge");
  }
  // corners: boundary vertices whose incident boundary edges carry both labels
  std::map<int, std::pair<bool, bool>> seen;
  for (const auto& [e, lab] : m.labels) {
    auto mark = [&](int v) {
      auto& s = seen[v];
      (lab == EdgeLabel::Fixed ? s.first : s.second) = true;
    };
    mark(e.first);
    mark(e.second);
  }
  for (const auto& [v, s] : seen)
    if (s.first && s.second) d.corner[v] = true;
  return d;
}

// |sum of interior angle defects + boundary turning angles - 2 pi chi|;
// a combinatorial identity for any manifold triangle mesh, corners included
// through their inner angles.
inline double gauss_bonnet_defect(const TriMesh& m) {
  MeshData d = analyze_mesh(m);
  double total = 0;
  for (size_t v = 0; v < m.V.size(); ++v) {
    if (d.angle_sum[v] == 0) continue;  // isolated
    total += d.on_boundary[v] ? (std::numbers::pi - d.angle_sum[v])
                              : (2.0 * std::numbers::pi - d.angle_sum[v]);
  }
  return std::abs(total - 2.0 * std::numbers::pi * m.euler_characteristic());
}

// ---------------------------------------------------------------------------
// OFF I/O with an auxiliary label stream: lines "edge v0 v1 FIXED|FREE".
// ---------------------------------------------------------------------------

inline void write_off(const TriMesh& m, std::ostream& os) {
  os << "OFF\n" << m.V.size() << ' ' << m.F.size() << " 0\n";
  os.precision(17);
  for (const auto& v : m.V) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& f : m.F) os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_labels(const TriMesh& m, std::ostream& os) {
  for (const auto& [e, lab] : m.labels)
    os << "edge " << e.first << ' ' << e.second << ' '
       << (lab == EdgeLabel::Fixed ? "FIXED" : "FREE") << '\n';
}

inline TriMesh read_off(std::istream& os, std::istream* labels = nullptr) {
  std::string tag;
  os >> tag;
  if (tag != "OFF") throw IoFailure("not an OFF file");
  size_t nv, nf, ne;
  os >> nv >> nf >> ne;
  TriMesh m;
  m.V.resize(nv);
  for (auto& v : m.V) os >> v[0] >> v[1] >> v[2];
  m.F.resize(nf);
  for (auto& f : m.F) {
    int k;
    os >> k;
    if (k != 3) throw IoFailure("only triangle faces supported");
    os >> f[0] >> f[1] >> f[2];
  }
  if (labels) {
    std::string word;
    while (*labels >> word) {
      if (word != "edge") throw IoFailure("bad label line");
      int a, b;
      std::string l;
      *labels >> a >> b >> l;
      m.labels[{std::min(a, b), std::max(a, b)}] =
          (l == "FIXED") ? EdgeLabel::Fixed : EdgeLabel::Free;
    }
  }
  return m;
}

}  // namespace lab

#endif  // LAB_TRI_MESH_HPP
