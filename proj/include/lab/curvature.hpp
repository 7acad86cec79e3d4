#ifndef LAB_CURVATURE_HPP
#define LAB_CURVATURE_HPP

#include <utility>
#include <vector>

#include "lab/common.hpp"
#include "lab/conformal_factor.hpp"
#include "lab/fields.hpp"
#include "lab/metric_field.hpp"

namespace lab {

struct Connection {
  Mat g, ginv;
  Tensor3 gamma;    // gamma(k,i,j) = Gamma^k_ij
  Tensor4 dgamma;   // dgamma(a,k,i,j) = d_a Gamma^k_ij
};

inline Connection connection(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  Connection c;
  c.g = jet.g;
  c.ginv = jet.g.inverse();
  c.gamma = Tensor3(n);
  c.dgamma = Tensor4(n);

  // Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_il - d_l g_ij)
  Tensor3 low(n);  // low(l,i,j) = 1/2 (d_i g_lj + d_j g_il - d_l g_ij)
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        low(l, i, j) = 0.5 * (jet.dg(i, l, j) + jet.dg(j, i, l) - jet.dg(l, i, j));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int l = 0; l < n; ++l) s += c.ginv(k, l) * low(l, i, j);
        c.gamma(k, i, j) = s;
      }

  // d_a Gamma^k_ij needs d_a g^{kl} = -g^{km} (d_a g_mp) g^{pl}
  Tensor3 dginv(n);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double s = 0;
        for (int m = 0; m < n; ++m)
          for (int p = 0; p < n; ++p) s -= c.ginv(k, m) * jet.dg(a, m, p) * c.ginv(p, l);
        dginv(a, k, l) = s;
      }
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0;
          for (int l = 0; l < n; ++l) {
            double dlow = 0.5 * (jet.d2g(a, i, l, j) + jet.d2g(a, j, i, l) - jet.d2g(a, l, i, j));
            s += dginv(a, k, l) * low(l, i, j) + c.ginv(k, l) * dlow;
          }
          c.dgamma(a, k, i, j) = s;
        }
  return c;
}

// R^l_{ijk} = [R(d_i, d_j) d_k]^l; lowered R_{ijkl} = <R(d_i,d_j) d_k, d_l>.
inline Tensor4 riemann_lower(const Connection& c) {
  const int n = static_cast<int>(c.g.rows());
  Tensor4 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double up = c.dgamma(i, l, j, k) - c.dgamma(j, l, i, k);
          for (int m = 0; m < n; ++m)
            up += c.gamma(l, i, m) * c.gamma(m, j, k) - c.gamma(l, j, m) * c.gamma(m, i, k);
          out(i, j, k, l) = up;  // still upper in l; lower below
        }
  Tensor4 low(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0;
          for (int m = 0; m < n; ++m) s += c.g(l, m) * out(i, j, k, m);
          low(i, j, k, l) = s;
        }
  return low;
}

inline Mat ricci(const Connection& c, const Tensor4& rlow) {
  const int n = static_cast<int>(c.g.rows());
  Mat ric = Mat::Zero(n, n);
  // Ric_jk = R^i_{ijk} = g^{il} R_{ijkl}
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) s += c.ginv(i, l) * rlow(i, j, k, l);
      ric(j, k) = s;
    }
  return ric;
}

inline double scalar_from_ricci(const Connection& c, const Mat& ric) {
  return (c.ginv.array() * ric.array()).sum();
}

// Laplace-Beltrami of a scalar 2-jet.
inline double laplace_beltrami(const Connection& c, const ScalarJet& u) {
  const int n = static_cast<int>(c.g.rows());
  double s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double cov = u.hess(i, j);
      for (int k = 0; k < n; ++k) cov -= c.gamma(k, i, j) * u.grad[k];
      s += c.ginv(i, j) * cov;
    }
  return s;
}

// Outward unit normal of the chart boundary and its first derivatives, as a
// field eta^i(x) = s * g^{iA} / sqrt(g^{AA}) on level sets of x_A.
struct BoundaryNormal {
  Vec eta;   // components eta^i
  Mat deta;  // deta(a, i) = d_a eta^i
};

inline BoundaryNormal boundary_normal(const MetricJet& jet, int axis, double sign) {
  const int n = static_cast<int>(jet.g.rows());
  Mat ginv = jet.g.inverse();
  Tensor3 dginv(n);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double s = 0;
        for (int m = 0; m < n; ++m)
          for (int p = 0; p < n; ++p) s -= ginv(k, m) * jet.dg(a, m, p) * ginv(p, l);
        dginv(a, k, l) = s;
      }
  BoundaryNormal bn;
  double q = ginv(axis, axis);
  bn.eta = sign * ginv.col(axis) / std::sqrt(q);
  bn.deta = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    double dq = dginv(a, axis, axis);
    for (int i = 0; i < n; ++i)
      bn.deta(a, i) =
          sign * (dginv(a, i, axis) / std::sqrt(q) - 0.5 * ginv(i, axis) * dq / std::pow(q, 1.5));
  }
  return bn;
}

// A(Y, Z) = <nabla_Y eta, Z> for Y, Z tangent to the boundary.
inline double second_form_boundary(const MetricJet& jet, const Connection& c,
                                   const BoundaryNormal& bn, const Vec& Y, const Vec& Z) {
  const int n = static_cast<int>(jet.g.rows());
  Vec cov = Vec::Zero(n);  // (nabla_Y eta)^m
  for (int m = 0; m < n; ++m) {
    double s = 0;
    for (int a = 0; a < n; ++a) {
      s += Y[a] * bn.deta(a, m);
      for (int k = 0; k < n; ++k) s += Y[a] * c.gamma(m, a, k) * bn.eta[k];
    }
    cov[m] = s;
  }
  return cov.dot(jet.g * Z);
}

// Mean curvature of the boundary w.r.t. the outward unit normal.
inline double boundary_mean_curvature(const MetricJet& jet, const Connection& c,
                                      const BoundaryNormal& bn, int axis) {
  const int n = static_cast<int>(jet.g.rows());
  // trace of A over the boundary tangent block (all indices except `axis`)
  std::vector<int> tang;
  for (int i = 0; i < n; ++i)
    if (i != axis) tang.push_back(i);
  const int m = static_cast<int>(tang.size());
  Mat gT(m, m), A(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) gT(a, b) = jet.g(tang[a], tang[b]);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vec Y = Vec::Zero(n), Z = Vec::Zero(n);
      Y[tang[a]] = 1.0;
      Z[tang[b]] = 1.0;
      A(a, b) = second_form_boundary(jet, c, bn, Y, Z);
    }
  return (gT.inverse().array() * A.array()).sum();
}

struct CurvatureSample {
  Vec x;
  double R = 0;         // scalar curvature
  double ricci_nu = 0;  // Ric(nu, nu)
  double H = 0;         // boundary mean curvature (boundary points only)
  std::vector<double> A;  // A(Y,Z) on the supplied tangent pairs
  bool boundary = false;
};

inline CurvatureSample curvature(const MetricField& field, const Vec& x, const Vec& nu,
                                 const std::vector<std::pair<Vec, Vec>>& tangent_pairs = {}) {
  MetricJet jet = field.jet(x);
  Connection c = connection(jet);
  Tensor4 rl = riemann_lower(c);
  Mat ric = ricci(c, rl);
  CurvatureSample s;
  s.x = x;
  s.R = scalar_from_ricci(c, ric);
  Vec v = nu;
  double norm2 = v.dot(jet.g * v);
  if (norm2 > 0) v /= std::sqrt(norm2);
  s.ricci_nu = v.dot(ric * v);
  if (field.chart().on_boundary(x)) {
    s.boundary = true;
    auto [axis, sign] = field.chart().boundary_axis(x);
    BoundaryNormal bn = boundary_normal(jet, axis, sign);
    s.H = boundary_mean_curvature(jet, c, bn, axis);
    for (const auto& [Y, Z] : tangent_pairs)
      s.A.push_back(second_form_boundary(jet, c, bn, Y, Z));
  }
  return s;
}

// Transformed scalar and boundary mean curvature of u^(4/(n-2)) g via the
// conformal Laplacian L u = -Lap_g u + c_n R_g u and boundary operator
// B u = d_nu u + 2 c_n H_g u.
inline std::pair<double, double> conformal_change(const MetricField& field,
                                                  const ScalarFieldFn& u, const Vec& x) {
  const int n = field.dimension();
  const double cn = conformal_coupling(n);
  ScalarJet uj = u(x);
  if (uj.value <= 0.0) throw NonPositiveConformalFactor("conformal factor u <= 0");
  MetricJet jet = field.jet(x);
  Connection c = connection(jet);
  Tensor4 rl = riemann_lower(c);
  double R = scalar_from_ricci(c, ricci(c, rl));
  double Lu = -laplace_beltrami(c, uj) + cn * R * uj.value;
  double R_new = std::pow(uj.value, -(n + 2.0) / (n - 2.0)) * Lu / cn;

  double H_new = 0.0;
  if (field.chart().on_boundary(x)) {
    auto [axis, sign] = field.chart().boundary_axis(x);
    BoundaryNormal bn = boundary_normal(jet, axis, sign);
    double H = boundary_mean_curvature(jet, c, bn, axis);
    double du_nu = bn.eta.dot(uj.grad);
    double Bu = du_nu + 2.0 * cn * H * uj.value;
    // exponent -n/(n-2): equivalent to e^-psi (H_g + (n-1) d_nu psi) with
    // psi = (2/(n-2)) log u; checked against direct curvature of u^(4/(n-2)) g
    H_new = 0.5 * std::pow(uj.value, -static_cast<double>(n) / (n - 2.0)) * Bu / cn;
  }
  return {R_new, H_new};
}

// div_g of the barrier field eta = h^(-2/(n-2)) d_n for g = h^(4/(n-2)) delta,
// evaluated exactly from the metric jet.  Asymptotically
// -2(n-1) C m x_n / |x|^n + O(|x|^-n).
inline double divergence_eta(const ConformalFactor& factor, const Vec& x) {
  const int n = factor.dimension();
  ScalarJet h = factor.jet(x);
  MetricField g = MetricField::conformally_flat(Chart::half_space(n), factor);
  MetricJet jet = g.jet(x);
  Mat ginv = jet.g.inverse();
  const double p = -2.0 / (n - 2.0);
  double coef = std::pow(h.value, p);
  double dcoef = p * std::pow(h.value, p - 1.0) * h.grad[n - 1];
  // div V = d_i V^i + V^i d_i log sqrt(det g); V = coef * e_n
  double dlog = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dlog += 0.5 * ginv(i, j) * jet.dg(n - 1, i, j);
  return dcoef + coef * dlog;
}

}  // namespace lab

#endif  // LAB_CURVATURE_HPP
