#ifndef LAB_MASS_HPP
#define LAB_MASS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lab/common.hpp"
#include "lab/metric_field.hpp"
#include "lab/quadrature.hpp"
#include "lab/surface_ops.hpp"

namespace lab {

// Raw hemisphere limit per unit mass parameter for the conformal family
// h = 1 + C m |x|^(2-n) with C = 1/2; see scripts/derive_calibration.py and
// data/mass_calibration.json.
inline double calibration_constant(int n) {
  return (n - 1) * sphere_area(n);
}

// Boundary-at-infinity mass integrand at one radius: hemisphere flux of
// (g_ij,j - g_jj,i) mu^i plus the equatorial correction sum_{a>=2} g_1a th^a
// with th the outward radial co-normal inside the boundary plane.
inline double adm_mass_at_radius(const MetricField& field, double r, double qtol = 1e-8) {
  if (field.chart().kind != ChartKind::HalfSpace)
    throw PointOutsideChart("mass is defined on half-space charts");
  const int n = field.dimension();

  auto hemi_integrand = [&](const Vec& x) {
    MetricJet jet = field.jet(x);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      double mu = x[i] / r;
      double s = 0;
      for (int j = 0; j < n; ++j) s += jet.dg(j, i, j) - jet.dg(i, j, j);
      acc += s * mu;
    }
    return acc;
  };
  double hemi = integrate_sphere(n, r, /*hemisphere=*/true, hemi_integrand, qtol);

  // equator S^{n-2}_r inside {x1 = 0}
  auto eq_integrand = [&](const Vec& y) {
    Vec x = Vec::Zero(n);
    for (int a = 1; a < n; ++a) x[a] = y[a - 1];
    MetricJet jet = field.jet(x);
    double acc = 0;
    for (int a = 1; a < n; ++a) acc += jet.g(0, a) * (x[a] / r);
    return acc;
  };
  double equator = integrate_sphere(n - 1, r, /*hemisphere=*/false, eq_integrand, qtol);
  return hemi + equator;
}

struct MassReport {
  std::vector<double> radii;
  std::vector<double> values;   // raw integrals per radius
  double limit = 0;             // extrapolated raw limit
  double exponent = 0;          // fitted s in value(r) = limit + b r^-s
  double coefficient = 0;       // fitted b
  double residual = 0;          // fit residual norm
  double calibrated = 0;        // limit / calibration_constant(n)
  std::string model = "affine in r^-s";
};

namespace detail {

struct PowerFit {
  double c0 = 0, b = 0, s = 0, residual = 0;
};

// least squares of v ~ c0 + b r^-s with s scanned then refined
inline PowerFit fit_power_tail(const std::vector<double>& r, const std::vector<double>& v,
                               double smax) {
  const int m = static_cast<int>(r.size());
  auto solve_for = [&](double s, PowerFit& out) {
    Mat X(m, 2);
    Vec y(m);
    for (int k = 0; k < m; ++k) {
      X(k, 0) = 1.0;
      X(k, 1) = std::pow(r[k], -s);
      y[k] = v[k];
    }
    Vec beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    out.c0 = beta[0];
    out.b = beta[1];
    out.s = s;
    out.residual = (X * beta - y).norm();
    return out.residual;
  };
  PowerFit best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 80; ++k) {
    double s = 0.05 + (smax - 0.05) * k / 80.0;
    PowerFit f;
    double res = solve_for(s, f);
    if (res < best_res) {
      best_res = res;
      best = f;
    }
  }
  // golden-section refine around the best s
  double a = std::max(0.02, best.s - (smax - 0.05) / 80.0);
  double b = std::min(smax, best.s + (smax - 0.05) / 80.0);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  PowerFit f1, f2;
  double r1 = solve_for(x1, f1), r2 = solve_for(x2, f2);
  for (int it = 0; it < 60; ++it) {
    if (r1 < r2) {
      b = x2;
      x2 = x1;
      r2 = r1;
      f2 = f1;
      x1 = b - gr * (b - a);
      r1 = solve_for(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      r1 = r2;
      f1 = f2;
      x2 = a + gr * (b - a);
      r2 = solve_for(x2, f2);
    }
  }
  return r1 < r2 ? f1 : f2;
}

}  // namespace detail

inline MassReport adm_mass(const MetricField& field, std::vector<double> radii,
                           double qtol = 1e-8) {
  if (radii.size() < 3) throw ConfigInvalid("need at least 3 radii for extrapolation");
  if (!std::is_sorted(radii.begin(), radii.end()))
    throw ConfigInvalid("radii must be ascending");
  MassReport rep;
  rep.radii = radii;
  rep.values.reserve(radii.size());
  for (double r : radii) rep.values.push_back(adm_mass_at_radius(field, r, qtol));

  double vmax = 0, vmin = 0;
  for (double v : rep.values) {
    vmax = std::max(vmax, v);
    vmin = std::min(vmin, v);
  }
  double range = vmax - vmin, scale = std::max(std::abs(vmax), std::abs(vmin));

  if (scale < 1e-10 || range < 1e-12 * (1.0 + scale)) {
    // flat-like sweep: report the mean, no power model
    double mean = 0;
    for (double v : rep.values) mean += v;
    mean /= rep.values.size();
    rep.limit = mean;
    rep.exponent = 0;
    rep.coefficient = 0;
    double res = 0;
    for (double v : rep.values) res += sq(v - mean);
    rep.residual = std::sqrt(res);
    rep.model = "constant";
  } else {
    auto fit = detail::fit_power_tail(rep.radii, rep.values, 2.0 * field.dimension());
    if (fit.residual > 0.5 * range)
      throw ExtrapolationIllConditioned("power-law model does not explain the sweep");
    rep.limit = fit.c0;
    rep.exponent = fit.s;
    rep.coefficient = fit.b;
    rep.residual = fit.residual;
  }
  rep.calibrated = rep.limit / calibration_constant(field.dimension());
  return rep;
}

// lim integral of -4 du/deta over the sphere of radius sigma inside the
// graph, eta the outward co-normal in the induced metric.  sigma snaps to
// the nearest grid ring.
inline double boundary_mass_flux(const GraphGeometry& geo, const ReducedField& u,
                                 double sigma) {
  const AnnulusGrid& g = geo.grid();
  if (sigma < g.rho_in * (1 - 1e-12) || sigma > g.rho_out * (1 + 1e-12))
    throw RadiusOutsideAnnulus("flux radius outside the annulus");
  int best = 0;
  double err = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= g.n_xi; ++i) {
    double e = std::abs(g.rho(i) - sigma);
    if (e < err) {
      err = e;
      best = i;
    }
  }
  return geo.integrate_ring(best, [&](const SurfaceNode& nd) {
    GridJet uj = u.jet(nd.i, nd.j);
    Eigen::Vector2d du(uj.vx, uj.vt);
    Eigen::Vector2d eta = nd.Ainv.col(0) / std::sqrt(nd.Ainv(0, 0));
    return -4.0 * eta.dot(du);
  });
}

}  // namespace lab

#endif  // LAB_MASS_HPP
