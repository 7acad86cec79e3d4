#ifndef LAB_SURFACE_OPS_HPP
#define LAB_SURFACE_OPS_HPP

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "lab/curvature.hpp"
#include "lab/graph_surface.hpp"
#include "lab/metric_field.hpp"
#include "lab/reduced_field.hpp"
#include "lab/reduced_geometry.hpp"

namespace lab {

// Pointwise geometric data of the graph at a node, in the adapted frame
// (slot 0 = x1, slot 1 = fiber radius direction, slot n-1 = height).
struct SurfaceNode {
  int i = 0, j = 0;
  NodeTag tag = NodeTag::Interior;
  double rho = 0, th = 0;
  Vec x;                     // ambient point
  GraphSurface::HeightJet fj{};
  double W = 1;              // sqrt(1 + fa^2 + fb^2)
  double h = 1;              // conformal factor value
  Vec E_xi, E_th;            // embedded tangents (full dim)
  Vec nu;                    // g-unit normal
  Eigen::Matrix2d A, Ainv;   // induced metric block in (xi, theta)
  double w = 1;              // g-scaled fiber radius
  double J = 1;              // sqrt(det A) * w^(d-2)
  Eigen::Matrix2d B2;        // second fundamental form block
  double bB = 0;             // fiber principal curvature
  double H = 0;              // mean curvature (trace convention)
  double B_norm2 = 0;
  double ric_nu = 0, R_M = 0;
  // free-boundary extras (tag == Free)
  double H_dM = 0, A_nunu = 0;
};

class GraphGeometry {
 public:
  explicit GraphGeometry(const GraphSurface& s)
      : surf_(&s), amb_(s.ambient_metric()), nodes_(s.grid().nodes()) {
    const AnnulusGrid& g = s.grid();
    ReducedMetric rm = ReducedMetric::zero(g);
    for (int i = 0; i <= g.n_xi; ++i)
      for (int j = 0; j <= g.n_th; ++j) {
        SurfaceNode nd = build_node(i, j);
        nodes_[g.id(i, j)] = nd;
        rm.a11.at(i, j) = nd.A(0, 0);
        rm.a12.at(i, j) = nd.A(0, 1);
        rm.a22.at(i, j) = nd.A(1, 1);
        rm.w.at(i, j) = nd.w;
      }
    induced_ = std::make_shared<ReducedMetric>(std::move(rm));
  }

  const GraphSurface& surface() const { return *surf_; }
  const AnnulusGrid& grid() const { return surf_->grid(); }
  const SurfaceNode& node(int i, int j) const { return nodes_[grid().id(i, j)]; }
  const ReducedMetric& induced() const { return *induced_; }
  const MetricField& ambient() const { return amb_; }

  ReducedMetricJet induced_jet(int i, int j) const {
    return reduced_metric_jet(*induced_, i, j);
  }

  // Christoffel symbols of the induced 2x2 block, Gamma^c_{ab}.
  std::array<Eigen::Matrix2d, 2> surface_christoffel(int i, int j) const {
    ReducedMetricJet rj = induced_jet(i, j);
    std::array<Eigen::Matrix2d, 2> out;
    Eigen::Matrix2d Ainv = rj.A.inverse();
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double s = 0;
          for (int dd = 0; dd < 2; ++dd)
            s += 0.5 * Ainv(c, dd) *
                 (rj.dA[a](dd, b) + rj.dA[b](a, dd) - rj.dA[dd](a, b));
          out[c](a, b) = s;
        }
    return out;
  }

  double xi_weight(int i) const {
    const AnnulusGrid& g = grid();
    return g.dxi() * ((i == 0 || i == g.n_xi) ? 0.5 : 1.0);
  }
  double theta_weight(int j) const {
    const AnnulusGrid& g = grid();
    if (g.d == 2) return g.dth() * ((j == 0 || j == g.n_th) ? 0.5 : 1.0);
    if (j == g.n_th) return 0.5 * g.dth();
    return g.dth();  // node 0 absorbs the axis sliver
  }
  double fiber_area() const { return grid().fiber_area(); }

  // integral over the surface of a per-node integrand
  template <class F>
  double integrate(F&& f) const {
    const AnnulusGrid& g = grid();
    double acc = 0;
    for (int i = 0; i <= g.n_xi; ++i)
      for (int j = 0; j <= g.n_th; ++j)
        acc += xi_weight(i) * theta_weight(j) * node(i, j).J * f(node(i, j));
    return acc * fiber_area();
  }

  // integral over the free edge(s) of Sigma
  template <class F>
  double integrate_free_edge(F&& f) const {
    const AnnulusGrid& g = grid();
    double acc = 0;
    for (int i = 0; i <= g.n_xi; ++i) {
      auto add = [&](int j) {
        const SurfaceNode& nd = node(i, j);
        double ds = std::sqrt(nd.A(0, 0)) * std::pow(nd.w, g.d - 2);
        acc += xi_weight(i) * ds * f(nd);
      };
      add(g.n_th);
      if (g.d == 2) add(0);
    }
    return acc * fiber_area();
  }

  // integral over a ring {xi = xi_i}
  template <class F>
  double integrate_ring(int i, F&& f) const {
    const AnnulusGrid& g = grid();
    double acc = 0;
    for (int j = 0; j <= g.n_th; ++j) {
      const SurfaceNode& nd = node(i, j);
      double ds = std::sqrt(nd.A(1, 1)) * std::pow(nd.w, g.d - 2);
      acc += theta_weight(j) * ds * f(nd);
    }
    return acc * fiber_area();
  }

  // Max |H|; the Dirichlet rings are truncation artifacts whose one-sided
  // estimates converge only with the grid, so they are excluded by default.
  double max_abs_H(bool include_rings = false) const {
    double m = 0;
    for (const auto& nd : nodes_) {
      if (!include_rings &&
          (nd.tag == NodeTag::FixedInner || nd.tag == NodeTag::FixedOuter))
        continue;
      m = std::max(m, std::abs(nd.H));
    }
    return m;
  }

  // Discrete-minimality gate for the second-variation formulas.
  void require_minimal(double tol) const {
    double m = max_abs_H();
    if (m > tol)
      throw NotMinimal("max |H| = " + std::to_string(m) + " exceeds " + std::to_string(tol));
  }

  double default_minimal_tol() const {
    // 1e-6 per unit inverse length at the surface scale
    return 1e-6 * std::max(1.0, 1.0 / grid().rho_out);
  }

 private:
  SurfaceNode build_node(int i, int j) const;

  const GraphSurface* surf_;
  MetricField amb_;
  std::vector<SurfaceNode> nodes_;
  std::shared_ptr<const ReducedMetric> induced_;
};

inline SurfaceNode GraphGeometry::build_node(int i, int j) const {
  const GraphSurface& s = *surf_;
  const AnnulusGrid& g = s.grid();
  const int n = s.ambient_dimension();
  const int d = g.d;
  SurfaceNode nd;
  nd.i = i;
  nd.j = j;
  nd.tag = s.tag(i, j);
  nd.rho = g.rho(i);
  nd.th = g.theta(j);
  nd.x = s.ambient_point(i, j);
  nd.fj = s.height_jet(i, j);
  nd.W = std::sqrt(1.0 + sq(nd.fj.fa) + sq(nd.fj.fb));

  MetricJet jet = amb_.jet(nd.x);
  Connection conn = connection(jet);
  Tensor4 riem = riemann_lower(conn);
  Mat ric = ricci(conn, riem);
  nd.R_M = scalar_from_ricci(conn, ric);
  nd.h = s.factor()(nd.x);

  const double rho = nd.rho, th = nd.th;
  const double cth = std::cos(th), sth = std::sin(th);
  nd.E_xi = Vec::Zero(n);
  nd.E_xi[0] = rho * cth;
  nd.E_xi[1] = rho * sth;
  nd.E_xi[n - 1] = nd.fj.f_xi;
  nd.E_th = Vec::Zero(n);
  nd.E_th[0] = -rho * sth;
  nd.E_th[1] = rho * cth;
  nd.E_th[n - 1] = nd.fj.f_th;

  const double conf = std::pow(nd.h, 4.0 / (n - 2));
  nd.nu = Vec::Zero(n);
  nd.nu[0] = -nd.fj.fa;
  nd.nu[1] = -nd.fj.fb;
  nd.nu[n - 1] = 1.0;
  nd.nu /= nd.W * std::pow(nd.h, 2.0 / (n - 2));  // g-unit

  nd.ric_nu = nd.nu.dot(ric * nd.nu);

  nd.A << conf * (sq(rho) + sq(nd.fj.f_xi)), conf * nd.fj.f_xi * nd.fj.f_th,
      conf * nd.fj.f_xi * nd.fj.f_th, conf * (sq(rho) + sq(nd.fj.f_th));
  nd.Ainv = nd.A.inverse();
  nd.w = std::pow(nd.h, 2.0 / (n - 2)) * rho * sth;
  nd.J = std::sqrt(nd.A.determinant()) * (d >= 3 ? std::pow(nd.w, d - 2) : 1.0);

  // second fundamental form: B(U,V) = -g(nu, D_UV P + Gamma(U,V))
  auto gamma_vec = [&](const Vec& U, const Vec& V) {
    Vec out = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) acc += conn.gamma(k, p, q) * U[p] * V[q];
      out[k] = acc;
    }
    return out;
  };
  auto gdot = [&](const Vec& u, const Vec& v) { return u.dot(jet.g * v); };

  GridJet fj2 = s.heights().jet(i, j);
  Vec Dxx = Vec::Zero(n), Dxt = Vec::Zero(n), Dtt = Vec::Zero(n);
  Dxx[0] = rho * cth;
  Dxx[1] = rho * sth;
  Dxx[n - 1] = fj2.vxx;
  Dxt[0] = -rho * sth;
  Dxt[1] = rho * cth;
  Dxt[n - 1] = fj2.vxt;
  Dtt[0] = -rho * cth;
  Dtt[1] = -rho * sth;
  Dtt[n - 1] = fj2.vtt;

  nd.B2(0, 0) = -gdot(nd.nu, Dxx + gamma_vec(nd.E_xi, nd.E_xi));
  nd.B2(0, 1) = nd.B2(1, 0) = -gdot(nd.nu, Dxt + gamma_vec(nd.E_xi, nd.E_th));
  nd.B2(1, 1) = -gdot(nd.nu, Dtt + gamma_vec(nd.E_th, nd.E_th));

  nd.bB = 0;
  if (d >= 3) {
    Vec Eo = Vec::Zero(n), Doo = Vec::Zero(n);
    Eo[2] = rho * sth;   // unit-speed fiber tangent, scaled by radius b
    Doo[1] = -rho * sth; // centripetal
    double Boo = -gdot(nd.nu, Doo + gamma_vec(Eo, Eo));
    nd.bB = Boo / gdot(Eo, Eo);
  }

  nd.H = (nd.Ainv * nd.B2).trace() + (d - 2) * nd.bB;
  double base = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e)
          base += nd.Ainv(a, c) * nd.Ainv(b, e) * nd.B2(a, b) * nd.B2(c, e);
  nd.B_norm2 = base + (d - 2) * sq(nd.bB);

  if (nd.tag == NodeTag::Free) {
    auto [axis, sign] = amb_.chart().boundary_axis(nd.x);
    BoundaryNormal bn = boundary_normal(jet, axis, sign);
    nd.H_dM = boundary_mean_curvature(jet, conn, bn, axis);
    nd.A_nunu = second_form_boundary(jet, conn, bn, nd.nu, nd.nu);
  }
  return nd;
}

// The induced metric as a reduced explicit MetricField on the half-annulus
// chart (the spec's hat-g = h^(4/(n-2)) (delta + df x df)).
inline MetricField induced_metric(const GraphSurface& s) {
  GraphGeometry geo(s);
  return MetricField::reduced(geo.induced());
}

// ---------------------------------------------------------------------------
// Variation fields X = T + phi nu with the covariant acceleration Z = nabla_X X
// decomposed as Zhat + zphi nu.  Built either from an ambient closed-form
// vector field (components in the adapted frame) or from a normal profile.
// ---------------------------------------------------------------------------

using AmbientVectorFn = std::function<Vec(const Vec&)>;

struct VariationField {
  ReducedField phi;                    // normal component
  ReducedField Txi, Tth;               // tangential components (xi, theta)
  ReducedField Zhat_xi, Zhat_th, Zphi; // decomposition of nabla_X X
  std::vector<Vec> X_amb, Zc_amb;      // adapted vectors; Zc is the coordinate
                                       // acceleration of the realizing flow
};

namespace detail {

inline void decompose_at_node(const SurfaceNode& nd, const Mat& g_amb, const Vec& V,
                              double& normal, Eigen::Vector2d& tangential) {
  normal = V.dot(g_amb * nd.nu);
  Vec T = V - normal * nd.nu;
  Eigen::Vector2d rhs(T.dot(g_amb * nd.E_xi), T.dot(g_amb * nd.E_th));
  tangential = nd.Ainv * rhs;
}

}  // namespace detail

inline VariationField make_variation(const GraphGeometry& geo, const AmbientVectorFn& X,
                                     double fd_eps = 1e-5) {
  const AnnulusGrid& g = geo.grid();
  VariationField v;
  v.phi = ReducedField(g, 0.0, +1);
  v.Txi = ReducedField(g, 0.0, +1);
  v.Tth = ReducedField(g, 0.0, -1);
  v.Zhat_xi = ReducedField(g, 0.0, +1);
  v.Zhat_th = ReducedField(g, 0.0, -1);
  v.Zphi = ReducedField(g, 0.0, +1);
  v.X_amb.resize(g.nodes());
  v.Zc_amb.resize(g.nodes());
  const MetricField& amb = geo.ambient();
  const int n = geo.surface().ambient_dimension();

  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      const SurfaceNode& nd = geo.node(i, j);
      Vec Xv = X(nd.x);
      if (nd.tag == NodeTag::Free && std::abs(Xv[0]) > 1e-10 * (1.0 + Xv.norm()))
        throw ConfigInvalid("variation field not tangent to the boundary on the free edge");
      // coordinate acceleration of the flow of X: (X . d) X
      Vec Zc = (X(nd.x + fd_eps * Xv) - X(nd.x - fd_eps * Xv)) / (2.0 * fd_eps);
      MetricJet jet = amb.jet(nd.x);
      Connection conn = connection(jet);
      Vec Zcov = Zc;
      for (int k = 0; k < n; ++k) {
        double acc = 0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) acc += conn.gamma(k, p, q) * Xv[p] * Xv[q];
        Zcov[k] += acc;
      }
      double phi, zphi;
      Eigen::Vector2d T, Zh;
      detail::decompose_at_node(nd, jet.g, Xv, phi, T);
      detail::decompose_at_node(nd, jet.g, Zcov, zphi, Zh);
      v.phi.at(i, j) = phi;
      v.Txi.at(i, j) = T[0];
      v.Tth.at(i, j) = T[1];
      v.Zhat_xi.at(i, j) = Zh[0];
      v.Zhat_th.at(i, j) = Zh[1];
      v.Zphi.at(i, j) = zphi;
      v.X_amb[g.id(i, j)] = Xv;
      v.Zc_amb[g.id(i, j)] = Zc;
    }
  return v;
}

// X = phi * nu for a given normal profile; the realizing flow is the straight
// flow (zero coordinate acceleration).
inline VariationField normal_variation(const GraphGeometry& geo, const ReducedField& phi) {
  const AnnulusGrid& g = geo.grid();
  VariationField v;
  v.phi = phi;
  v.Txi = ReducedField(g, 0.0, +1);
  v.Tth = ReducedField(g, 0.0, -1);
  v.Zhat_xi = ReducedField(g, 0.0, +1);
  v.Zhat_th = ReducedField(g, 0.0, -1);
  v.Zphi = ReducedField(g, 0.0, +1);
  v.X_amb.resize(g.nodes());
  v.Zc_amb.resize(g.nodes());
  const MetricField& amb = geo.ambient();
  const int n = geo.surface().ambient_dimension();
  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      const SurfaceNode& nd = geo.node(i, j);
      Vec Xv = phi.at(i, j) * nd.nu;
      MetricJet jet = amb.jet(nd.x);
      Connection conn = connection(jet);
      Vec Zcov = Vec::Zero(n);
      for (int k = 0; k < n; ++k) {
        double acc = 0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) acc += conn.gamma(k, p, q) * Xv[p] * Xv[q];
        Zcov[k] = acc;
      }
      double zphi;
      Eigen::Vector2d Zh;
      detail::decompose_at_node(nd, jet.g, Zcov, zphi, Zh);
      v.Zhat_xi.at(i, j) = Zh[0];
      v.Zhat_th.at(i, j) = Zh[1];
      v.Zphi.at(i, j) = zphi;
      v.X_amb[g.id(i, j)] = Xv;
      v.Zc_amb[g.id(i, j)] = Vec::Zero(n);
    }
  return v;
}

// delta Sigma (X) = int_Sigma H <X, nu> + int_{boundary} <X, eta>.
inline double first_variation(const GraphGeometry& geo, const VariationField& var) {
  const AnnulusGrid& g = geo.grid();
  double interior = geo.integrate([&](const SurfaceNode& nd) {
    return nd.H * var.phi.at(nd.i, nd.j);
  });

  const MetricField& amb = geo.ambient();
  auto edge_term = [&](const SurfaceNode& nd, int axis, double sign) {
    // outward unit co-normal of the edge inside Sigma
    Eigen::Vector2d eta = sign * nd.Ainv.col(axis) / std::sqrt(nd.Ainv(axis, axis));
    Vec eta_full = eta[0] * nd.E_xi + eta[1] * nd.E_th;
    Mat gm = amb.jet(nd.x).g;
    return var.X_amb[g.id(nd.i, nd.j)].dot(gm * eta_full);
  };

  double boundary = 0;
  boundary += geo.integrate_free_edge([&](const SurfaceNode& nd) {
    return edge_term(nd, 1, nd.j == 0 ? -1.0 : +1.0);
  });
  boundary += geo.integrate_ring(g.n_xi, [&](const SurfaceNode& nd) {
    return edge_term(nd, 0, +1.0);
  });
  boundary += geo.integrate_ring(0, [&](const SurfaceNode& nd) {
    return edge_term(nd, 0, -1.0);
  });
  return interior + boundary;
}

// ---------------------------------------------------------------------------
// Second variation density F_X and the two divergence identities.
// ---------------------------------------------------------------------------

struct DensityField {
  ReducedField FX;             // density values
  ReducedField id1_lhs, id1_rhs, id2_lhs, id2_rhs;
  double integral = 0;         // int F_X dvol
};

namespace detail {

// divergence of an invariant tangential field given by component fields
inline ReducedField divergence_field(const GraphGeometry& geo, const ReducedField& Vxi,
                                     const ReducedField& Vth) {
  const AnnulusGrid& g = geo.grid();
  ReducedField JVx(g, 0.0, +1), JVt(g, 0.0, -1), out(g, 0.0, +1);
  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      double J = geo.node(i, j).J;
      JVx.at(i, j) = J * Vxi.at(i, j);
      JVt.at(i, j) = J * Vth.at(i, j);
    }
  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j)
      out.at(i, j) = (JVx.jet(i, j).vx + JVt.jet(i, j).vt) / geo.node(i, j).J;
  return out;
}

struct TangentDerivatives {
  Eigen::Matrix2d covar;  // (nabla T)^a_b = d_b T^a + Gamma^a_{bc} T^c
  double div = 0;         // full divergence incl. fiber term
  double fiber = 0;       // T . grad(log w)
};

inline TangentDerivatives tangent_derivatives(const GraphGeometry& geo,
                                              const ReducedField& Txi,
                                              const ReducedField& Tth, int i, int j) {
  const AnnulusGrid& g = geo.grid();
  GridJet jx = Txi.jet(i, j), jt = Tth.jet(i, j);
  auto gam = geo.surface_christoffel(i, j);
  Eigen::Vector2d T(jx.v, jt.v);
  TangentDerivatives td;
  // d_b T^a
  Eigen::Matrix2d dT;
  dT << jx.vx, jx.vt, jt.vx, jt.vt;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = dT(a, b);
      for (int c = 0; c < 2; ++c) s += gam[a](b, c) * T[c];
      td.covar(a, b) = s;
    }
  if (g.d >= 3) {
    ReducedMetricJet rj = geo.induced_jet(i, j);
    Eigen::Vector2d dlogw(rj.w.vx / rj.w.v, rj.w.vt / rj.w.v);
    td.fiber = T.dot(dlogw);
  }
  td.div = td.covar.trace() + (g.d - 2) * td.fiber;
  return td;
}

}  // namespace detail

// Evaluates F_X over the whole grid together with both divergence identities
// (each as written on the left and fully expanded on the right).
inline DensityField second_variation_density(const GraphGeometry& geo,
                                             const VariationField& var,
                                             double minimal_tol = -1.0) {
  if (minimal_tol < 0) minimal_tol = geo.default_minimal_tol();
  geo.require_minimal(minimal_tol);

  const AnnulusGrid& g = geo.grid();
  const int n = geo.surface().ambient_dimension();
  const int d = g.d;

  // fields entering divergences
  ReducedField Vxi(g, 0.0, +1), Vth(g, 0.0, -1);      // T div T - nabla_T T
  ReducedField V2xi(g, 0.0, +1), V2th(g, 0.0, -1);    // phi B(T,.)^sharp
  std::vector<detail::TangentDerivatives> tds(g.nodes());

  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      const SurfaceNode& nd = geo.node(i, j);
      auto td = detail::tangent_derivatives(geo, var.Txi, var.Tth, i, j);
      tds[g.id(i, j)] = td;
      Eigen::Vector2d T(var.Txi.at(i, j), var.Tth.at(i, j));
      Eigen::Vector2d nabTT = td.covar * T;  // (nabla_T T)^a = (nabla T)^a_b T^b
      Eigen::Vector2d V = td.div * T - nabTT;
      Vxi.at(i, j) = V[0];
      Vth.at(i, j) = V[1];
      Eigen::Vector2d BT = nd.B2 * T;               // B(T, .)_a
      Eigen::Vector2d V2 = var.phi.at(i, j) * (nd.Ainv * BT);
      V2xi.at(i, j) = V2[0];
      V2th.at(i, j) = V2[1];
    }

  ReducedField divV = detail::divergence_field(geo, Vxi, Vth);
  ReducedField divV2 = detail::divergence_field(geo, V2xi, V2th);
  ReducedField divZ = detail::divergence_field(geo, var.Zhat_xi, var.Zhat_th);

  DensityField out;
  out.FX = ReducedField(g, 0.0, +1);
  out.id1_lhs = divV;
  out.id1_rhs = ReducedField(g, 0.0, +1);
  out.id2_lhs = ReducedField(g, 0.0, +1);
  out.id2_rhs = ReducedField(g, 0.0, +1);

  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      const SurfaceNode& nd = geo.node(i, j);
      const auto& td = tds[g.id(i, j)];
      GridJet pj = var.phi.jet(i, j);
      Eigen::Vector2d dphi(pj.vx, pj.vt);
      Eigen::Vector2d gradphi = nd.Ainv * dphi;  // raised
      double grad_phi2 = dphi.dot(gradphi);
      double phi = pj.v;

      double fx = -sq(phi) * nd.ric_nu - sq(phi) * nd.B_norm2 + grad_phi2 +
                  divV.at(i, j) + divZ.at(i, j) - 2.0 * divV2.at(i, j);
      out.FX.at(i, j) = fx;

      // ambient curvature contractions over the surface frame
      MetricJet jet = geo.ambient().jet(nd.x);
      Connection conn = connection(jet);
      Tensor4 riem = riemann_lower(conn);
      Eigen::Vector2d T(var.Txi.at(i, j), var.Tth.at(i, j));
      Vec Tfull = T[0] * nd.E_xi + T[1] * nd.E_th;
      auto riem4 = [&](const Vec& a, const Vec& b, const Vec& c, const Vec& e) {
        double s = 0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
              for (int t = 0; t < n; ++t)
                s += riem(p, q, r, t) * a[p] * b[q] * c[r] * e[t];
        return s;
      };
      double R_TT = 0, R_Tnu = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Vec Ea = (a == 0) ? nd.E_xi : nd.E_th;
          Vec Eb = (b == 0) ? nd.E_xi : nd.E_th;
          R_TT += nd.Ainv(a, b) * riem4(Tfull, Ea, Tfull, Eb);
          R_Tnu += nd.Ainv(a, b) * riem4(Tfull, Ea, nd.nu, Eb);
        }
      if (d >= 3) {
        Vec Eo = Vec::Zero(n);
        Eo[2] = 1.0;  // unit coordinate fiber direction; g-norm handled below
        double go = Eo.dot(jet.g * Eo);
        R_TT += (d - 2) * riem4(Tfull, Eo, Tfull, Eo) / go;
        R_Tnu += (d - 2) * riem4(Tfull, Eo, nd.nu, Eo) / go;
      }

      // |B(T,.)|^2 and <nabla T, B>
      Eigen::Vector2d BT = nd.B2 * T;
      double BT2 = BT.dot(nd.Ainv * BT);
      // P_ab = <nabla_{E_a} T, E_b> = A_bc (nabla T)^c_a
      Eigen::Matrix2d P;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double s = 0;
          for (int c = 0; c < 2; ++c) s += nd.A(b, c) * td.covar(c, a);
          P(a, b) = s;
        }
      double PP = 0, PB = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int e = 0; e < 2; ++e) {
              PP += nd.Ainv(a, c) * nd.Ainv(b, e) * P(a, b) * P(e, c);
              PB += nd.Ainv(a, c) * nd.Ainv(b, e) * P(a, b) * nd.B2(c, e);
            }
      if (d >= 3) {
        PP += (d - 2) * sq(td.fiber);
        PB += (d - 2) * td.fiber * nd.bB;
      }

      out.id1_rhs.at(i, j) = R_TT + sq(td.div) + BT2 - PP;
      out.id2_lhs.at(i, j) = -2.0 * divV2.at(i, j);
      double BTgrad = BT.dot(gradphi);
      out.id2_rhs.at(i, j) = 2.0 * phi * R_Tnu - 2.0 * BTgrad - 2.0 * phi * PB;
    }

  out.integral = geo.integrate([&](const SurfaceNode& nd) { return out.FX.at(nd.i, nd.j); });
  return out;
}

// Normal second variation: int |grad phi|^2 - (Ric(nu) + |B|^2) phi^2 minus
// the free-boundary term int phi^2 A(nu, nu).  Returns (total, boundary term).
inline std::pair<double, double> second_variation_normal(const GraphGeometry& geo,
                                                         const ReducedField& phi,
                                                         double minimal_tol = -1.0) {
  if (minimal_tol < 0) minimal_tol = geo.default_minimal_tol();
  geo.require_minimal(minimal_tol);
  double interior = geo.integrate([&](const SurfaceNode& nd) {
    GridJet pj = phi.jet(nd.i, nd.j);
    Eigen::Vector2d dphi(pj.vx, pj.vt);
    double grad2 = dphi.dot(nd.Ainv * dphi);
    return grad2 - (nd.ric_nu + nd.B_norm2) * sq(pj.v);
  });
  double boundary = geo.integrate_free_edge([&](const SurfaceNode& nd) {
    return sq(phi.at(nd.i, nd.j)) * nd.A_nunu;
  });
  return {interior - boundary, boundary};
}

// ---------------------------------------------------------------------------
// Stability quadratic forms.
// ---------------------------------------------------------------------------

struct StabilityReport {
  // interior integrals (phi^2-weighted unless stated)
  double grad2 = 0;      // int |grad phi|^2
  double ric_nu = 0;     // int phi^2 Ric(nu)
  double B2 = 0;         // int phi^2 |B|^2
  double R_M = 0;        // int phi^2 R_M
  double R_Sigma = 0;    // int phi^2 R_Sigma
  // free-boundary integrals
  double bd_A = 0;       // int phi^2 A(nu,nu)
  double bd_HdM = 0;     // int phi^2 H_{dM}
  double bd_HdSigma = 0; // int phi^2 H_{dSigma}
  // assembled left-hand sides
  double stability = 0;
  double stability2 = 0;
  double stability_use = 0;
  double strong_stability = 0;
  double conformal_rough_lhs = 0, conformal_rough_rhs = 0;
  bool stability_holds = false, identity_ok = false, conformal_rough_holds = false;
  double identity_residual = 0;
};

inline StabilityReport stability_report(const GraphGeometry& geo, const ReducedField& phi,
                                        double minimal_tol = -1.0) {
  if (minimal_tol < 0) minimal_tol = geo.default_minimal_tol();
  geo.require_minimal(minimal_tol);
  const int d = geo.grid().d;
  StabilityReport r;
  r.grad2 = geo.integrate([&](const SurfaceNode& nd) {
    GridJet pj = phi.jet(nd.i, nd.j);
    Eigen::Vector2d dphi(pj.vx, pj.vt);
    return dphi.dot(nd.Ainv * dphi);
  });
  auto wphi2 = [&](auto&& get) {
    return geo.integrate([&](const SurfaceNode& nd) {
      return sq(phi.at(nd.i, nd.j)) * get(nd);
    });
  };
  r.ric_nu = wphi2([](const SurfaceNode& nd) { return nd.ric_nu; });
  r.B2 = wphi2([](const SurfaceNode& nd) { return nd.B_norm2; });
  r.R_M = wphi2([](const SurfaceNode& nd) { return nd.R_M; });
  r.R_Sigma = geo.integrate([&](const SurfaceNode& nd) {
    return sq(phi.at(nd.i, nd.j)) * reduced_scalar_curvature(d, geo.induced_jet(nd.i, nd.j));
  });
  r.bd_A = geo.integrate_free_edge([&](const SurfaceNode& nd) {
    return sq(phi.at(nd.i, nd.j)) * nd.A_nunu;
  });
  r.bd_HdM = geo.integrate_free_edge([&](const SurfaceNode& nd) {
    return sq(phi.at(nd.i, nd.j)) * nd.H_dM;
  });
  r.bd_HdSigma = geo.integrate_free_edge([&](const SurfaceNode& nd) {
    double sign = (nd.j == 0 && d == 2) ? -1.0 : +1.0;
    return sq(phi.at(nd.i, nd.j)) *
           reduced_edge_mean_curvature(d, geo.induced_jet(nd.i, nd.j), 1, sign);
  });

  r.stability = r.grad2 - r.ric_nu - r.B2 - r.bd_A;
  r.stability2 = r.grad2 - (0.5 * r.R_M - 0.5 * r.R_Sigma + 0.5 * r.B2) -
                 (r.bd_HdM - r.bd_HdSigma);
  r.stability_use = r.grad2 + 0.5 * r.R_Sigma + r.bd_HdSigma;
  r.strong_stability = r.stability;
  r.conformal_rough_lhs = r.stability_use;
  r.conformal_rough_rhs = 0.5 * (r.R_M + r.B2) + r.bd_HdM;

  r.identity_residual = std::abs(r.stability - r.stability2);
  double scale = std::abs(r.grad2) + std::abs(r.ric_nu) + std::abs(r.B2) + 1e-30;
  r.identity_ok = r.identity_residual <= 1e-2 * scale + 1e-10;
  r.stability_holds = r.stability >= -1e-10 * scale;
  r.conformal_rough_holds = r.conformal_rough_lhs >= r.conformal_rough_rhs - 1e-8 * scale;
  return r;
}

// ---------------------------------------------------------------------------
// Finite-difference area oracle: area of the flowed surface x -> x + tX
// (+ t^2/2 Zc when order == 2), by central differences at t = 0.
// ---------------------------------------------------------------------------

inline double flowed_area(const GraphGeometry& geo, const VariationField& var, double t,
                          bool with_correction) {
  const AnnulusGrid& g = geo.grid();
  const int n = geo.surface().ambient_dimension();
  const int d = g.d;
  const ConformalFactor& h = geo.surface().factor();
  // flowed adapted coordinates as grid fields
  ReducedField Pa(g, 0.0, +1), Pb(g, 0.0, -1), Pz(g, 0.0, +1);
  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      const SurfaceNode& nd = geo.node(i, j);
      Vec q = nd.x + t * var.X_amb[g.id(i, j)];
      if (with_correction) q += 0.5 * t * t * var.Zc_amb[g.id(i, j)];
      Pa.at(i, j) = q[0];
      Pb.at(i, j) = q[1];
      Pz.at(i, j) = q[n - 1];
    }
  double area = 0;
  for (int i = 0; i <= g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      GridJet ja = Pa.jet(i, j), jb = Pb.jet(i, j), jz = Pz.jet(i, j);
      Eigen::Vector3d Ex(ja.vx, jb.vx, jz.vx), Et(ja.vt, jb.vt, jz.vt);
      Vec q = Vec::Zero(n);
      q[0] = ja.v;
      q[1] = jb.v;
      q[n - 1] = jz.v;
      double hv = h(q);
      double conf = std::pow(hv, 4.0 / (n - 2));
      Eigen::Matrix2d Abar;
      Abar << conf * Ex.dot(Ex), conf * Ex.dot(Et), conf * Ex.dot(Et), conf * Et.dot(Et);
      double wbar = std::pow(hv, 2.0 / (n - 2)) * jb.v;
      double J = std::sqrt(std::max(0.0, Abar.determinant())) *
                 (d >= 3 ? std::pow(wbar, d - 2) : 1.0);
      area += geo.xi_weight(i) * geo.theta_weight(j) * J;
    }
  return area * geo.fiber_area();
}

// order = 1: first derivative of area; order = 2: second derivative.
// Steps must be descending; the Richardson sequence must contract.
inline double fd_area_variation(const GraphGeometry& geo, const VariationField& var,
                                int order, std::vector<double> steps = {1e-2, 1e-3}) {
  if (steps.size() < 2) steps.push_back(steps.front() / 10.0);
  std::vector<double> D;
  double A0 = flowed_area(geo, var, 0.0, order == 2);
  for (double t : steps) {
    double Ap = flowed_area(geo, var, t, order == 2);
    double Am = flowed_area(geo, var, -t, order == 2);
    D.push_back(order == 1 ? (Ap - Am) / (2 * t) : (Ap - 2 * A0 + Am) / (t * t));
  }
  if (D.size() >= 3) {
    double d1 = std::abs(D[1] - D[0]), d2 = std::abs(D[2] - D[1]);
    if (d2 > d1 * 1.5 + 1e-12)
      throw StepTooLargeForStencil("finite-difference sequence not contracting");
  }
  // Richardson with the final pair (central differences are O(t^2))
  double tc = steps[steps.size() - 2], tf = steps.back();
  double Dc = D[D.size() - 2], Df = D.back();
  return (Df * tc * tc - Dc * tf * tf) / (tc * tc - tf * tf);
}

}  // namespace lab

#endif  // LAB_SURFACE_OPS_HPP
