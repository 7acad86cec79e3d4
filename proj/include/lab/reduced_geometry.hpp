#ifndef LAB_REDUCED_GEOMETRY_HPP
#define LAB_REDUCED_GEOMETRY_HPP

#include <cmath>

#include "lab/curvature.hpp"
#include "lab/metric_field.hpp"

namespace lab {

// Helpers for metrics in the reduced half-annulus representation
// A(xi, theta) + w(xi, theta)^2 g_{S^(d-2)}.  All formulas are pointwise in
// the jets; the fiber is a round unit sphere warped by w.

inline MetricJet base_block_jet(const ReducedMetricJet& rj) {
  MetricJet j;
  j.g = rj.A;
  j.dg = Tensor3(2);
  j.d2g = Tensor4(2);
  auto put1 = [&](int k, const Eigen::Matrix2d& M) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j.dg(k, a, b) = M(a, b);
  };
  put1(0, rj.dA[0]);
  put1(1, rj.dA[1]);
  auto put2 = [&](int k, int l, const Eigen::Matrix2d& M) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j.d2g(k, l, a, b) = M(a, b);
  };
  put2(0, 0, rj.d2A[0]);
  put2(0, 1, rj.d2A[1]);
  put2(1, 0, rj.d2A[1]);
  put2(1, 1, rj.d2A[2]);
  return j;
}

// Scalar curvature of the d-dimensional warped metric.
inline double reduced_scalar_curvature(int d, const ReducedMetricJet& rj) {
  MetricJet bj = base_block_jet(rj);
  Connection c = connection(bj);
  Tensor4 rl = riemann_lower(c);
  double R_base = 2.0 * rl(0, 1, 1, 0) / bj.g.determinant();
  // sign: R_2d = 2 K = 2 R_{0110}/det in our lowered-index convention
  if (d == 2) return R_base;

  const int k = d - 2;
  ScalarJet wj;
  wj.value = rj.w.v;
  wj.grad = Vec(2);
  wj.grad << rj.w.vx, rj.w.vt;
  wj.hess = Mat(2, 2);
  wj.hess << rj.w.vxx, rj.w.vxt, rj.w.vxt, rj.w.vtt;
  double lap_w = laplace_beltrami(c, wj);
  Eigen::Vector2d gw(rj.w.vx, rj.w.vt);
  double grad_w2 = gw.transpose() * bj.g.inverse().eval() * gw;
  double w = rj.w.v;
  return R_base - 2.0 * k * lap_w / w - k * (k - 1) * (grad_w2 - 1.0) / (w * w);
}

// Mean curvature (w.r.t. the outward unit normal) of a coordinate edge
// {axis-coordinate = const} inside the reduced manifold.  axis = 0 for rings
// {xi = const}, axis = 1 for the free edge {theta = const};
// sign = +1 if outward is the increasing coordinate direction.
inline double reduced_edge_mean_curvature(int d, const ReducedMetricJet& rj, int axis,
                                          double sign) {
  Eigen::Matrix2d Ainv = rj.A.inverse();
  double q = Ainv(axis, axis);
  Eigen::Vector2d nvec = sign * Ainv.col(axis) / std::sqrt(q);

  // d_a of Ainv and of n^a
  Eigen::Matrix2d dAinv[2];
  for (int a = 0; a < 2; ++a) dAinv[a] = -Ainv * rj.dA[a] * Ainv;
  double div = 0.0;
  for (int a = 0; a < 2; ++a) {
    double dq = dAinv[a](axis, axis);
    double dn = sign * (dAinv[a](a, axis) / std::sqrt(q) -
                        0.5 * Ainv(a, axis) * dq / std::pow(q, 1.5));
    // d_a log J with J = sqrt(det A) * w^(d-2)
    double dlogJ = 0.5 * (Ainv * rj.dA[a]).trace();
    if (d >= 3) dlogJ += (d - 2) * (a == 0 ? rj.w.vx : rj.w.vt) / rj.w.v;
    div += dn + nvec[a] * dlogJ;
  }
  return div;
}

// Laplace-Beltrami of an invariant scalar with (xi,theta) jet, pointwise.
inline double reduced_laplacian(int d, const ReducedMetricJet& rj, const GridJet& u) {
  MetricJet bj = base_block_jet(rj);
  Connection c = connection(bj);
  ScalarJet uj;
  uj.value = u.v;
  uj.grad = Vec(2);
  uj.grad << u.vx, u.vt;
  uj.hess = Mat(2, 2);
  uj.hess << u.vxx, u.vxt, u.vxt, u.vtt;
  double lap = laplace_beltrami(c, uj);
  if (d >= 3) {
    Eigen::Vector2d gw(rj.w.vx, rj.w.vt), gu(u.vx, u.vt);
    double cross = gw.transpose() * bj.g.inverse().eval() * gu;
    lap += (d - 2) * cross / rj.w.v;
  }
  return lap;
}

}  // namespace lab

#endif  // LAB_REDUCED_GEOMETRY_HPP
