#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "helpers.hpp"
#include "lab/mass.hpp"
#include "lab/quadrature.hpp"

using namespace lab;
using Catch::Approx;

TEST_CASE("calibration constants match the derivation script output") {
  std::ifstream in(std::string(LAB_SOURCE_DIR) + "/data/mass_calibration.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  REQUIRE(j["factor_constant_C"].get<double>() == 0.5);
  for (int n = 3; n <= 7; ++n) {
    double golden = j["calibration"][std::to_string(n)].get<double>();
    REQUIRE(calibration_constant(n) == Approx(golden).epsilon(1e-12));
  }
}

TEST_CASE("flat half-space has zero mass") {
  auto flat = MetricField::flat(Chart::half_space(3));
  REQUIRE(std::abs(adm_mass_at_radius(flat, 10.0)) < 1e-10);
  auto rep = adm_mass(flat, {10.0, 20.0, 40.0});
  REQUIRE(std::abs(rep.limit) < 1e-10);
  REQUIRE(rep.residual < 1e-10);
}

TEST_CASE("single-radius mass of the conformal family") {
  const int n = 3;
  ConformalFactor f(n, 1.0);
  auto g = MetricField::conformally_flat(Chart::half_space(n), f);
  double v = adm_mass_at_radius(g, 100.0);
  // analytic limit = calibration constant * m (symbolic oracle)
  REQUIRE(v == Approx(calibration_constant(n) * 1.0).epsilon(0.02));
}

TEST_CASE("extrapolated calibrated mass recovers m within 1 percent") {
  for (int n : {3, 4}) {
    ConformalFactor f(n, 1.0);
    auto g = MetricField::conformally_flat(Chart::half_space(n), f);
    auto rep = adm_mass(g, {25, 50, 100, 200});
    REQUIRE(rep.calibrated == Approx(1.0).epsilon(0.01));
    REQUIRE(rep.exponent > 0.0);
  }
}

TEST_CASE("calibrated mass is linear in m") {
  const int n = 3;
  auto rep1 = adm_mass(
      MetricField::conformally_flat(Chart::half_space(n), ConformalFactor(n, 1.0)),
      {25, 50, 100, 200});
  auto rep2 = adm_mass(
      MetricField::conformally_flat(Chart::half_space(n), ConformalFactor(n, -2.0)),
      {25, 50, 100, 200});
  REQUIRE(rep2.calibrated / rep1.calibrated == Approx(-2.0).epsilon(0.01));
}

TEST_CASE("compact-support perturbation has zero integrand beyond support") {
  const int n = 3;
  // gamma = b(|x|^2) diag(1,2,3) with b = ((25 - r^2)/25)^3 inside r < 5
  TensorFieldFn gamma = [](const Vec& x) -> TensorJet {
    const int nn = 3;
    TensorJet t;
    t.value = Mat::Zero(nn, nn);
    t.d1 = Tensor3(nn);
    t.d2 = Tensor4(nn);
    double r2 = x.squaredNorm();
    if (r2 >= 25.0) return t;
    double u = (25.0 - r2) / 25.0;
    double b = u * u * u;
    double db = -3.0 * u * u / 25.0;        // d b/d(r2)
    double ddb = 6.0 * u / (25.0 * 25.0);   // d^2 b/d(r2)^2
    Vec diag(3);
    diag << 1, 2, 3;
    for (int i = 0; i < nn; ++i) {
      t.value(i, i) = b * diag[i];
      for (int k = 0; k < nn; ++k) {
        t.d1(k, i, i) = db * 2.0 * x[k] * diag[i];
        for (int l = 0; l < nn; ++l)
          t.d2(k, l, i, i) = (ddb * 4.0 * x[k] * x[l] + db * 2.0 * (k == l)) * diag[i];
      }
    }
    return t;
  };
  auto g = MetricField::perturbed(MetricField::flat(Chart::half_space(n)), gamma, 0.1);
  REQUIRE(std::abs(adm_mass_at_radius(g, 10.0)) < 1e-12);
}

TEST_CASE("mass is gauge invariant: pullback of flat has vanishing mass") {
  // phi = id + t Y with Y = x1 x3 / r^2 e3 (tangent to the boundary); the
  // hemisphere term alone converges to -pi t, the equator term cancels it.
  const int n = 3;
  const double t = 0.05;
  auto gradY = [](const Vec& x) -> Vec {
    double r2 = x.squaredNorm();
    Vec g(3);
    for (int k = 0; k < 3; ++k)
      g[k] = ((k == 0 ? x[2] : 0.0) + (k == 2 ? x[0] : 0.0)) / r2 -
             2.0 * x[0] * x[2] * x[k] / (r2 * r2);
    return g;
  };
  auto gval = [&](const Vec& x) -> Mat {
    Vec gy = gradY(x);
    Mat G = Mat::Identity(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        G(i, j) += t * ((i == 2 ? gy[j] : 0.0) + (j == 2 ? gy[i] : 0.0)) +
                   t * t * gy[i] * gy[j];
    return G;
  };
  auto g = MetricField::closed_form(Chart::half_space(n), testing::fd_metric(gval, n));

  // hemisphere term alone (independent evaluation) does NOT vanish
  double r = 80.0;
  auto hemi_only = [&](const Vec& x) {
    MetricJet jet = g.jet(x);
    double acc = 0;
    for (int i = 0; i < 3; ++i) {
      double s = 0;
      for (int j = 0; j < 3; ++j) s += jet.dg(j, i, j) - jet.dg(i, j, j);
      acc += s * x[i] / r;
    }
    return acc;
  };
  // finite-difference jets put a ~1e-10 noise floor under the integrand, so
  // run the quadrature at a matching tolerance
  double hemi = integrate_sphere(3, r, true, hemi_only, 1e-5);
  REQUIRE(std::abs(hemi) > 0.5 * std::numbers::pi * t);  // ~ -pi t
  double total = adm_mass_at_radius(g, r, 1e-5);
  REQUIRE(std::abs(total) < 0.05 * std::abs(hemi));
}

TEST_CASE("equator term vanishes identically when the g_{1a} row is zero") {
  const int n = 3;
  ConformalFactor f(n, 1.3);
  auto g = MetricField::conformally_flat(Chart::half_space(n), f);
  auto eq_only = [&](const Vec& y) {
    Vec x = Vec::Zero(n);
    x[1] = y[0];
    x[2] = y[1];
    MetricJet jet = g.jet(x);
    double acc = 0;
    for (int a = 1; a < n; ++a) acc += jet.g(0, a) * x[a] / 50.0;
    return acc;
  };
  REQUIRE(std::abs(integrate_sphere(2, 50.0, false, eq_only)) < 1e-14);
}

TEST_CASE("hemisphere mass is equivariant under tangential rotations") {
  const int n = 3;
  double ang = 0.7;
  auto corr = [](const Vec& x) {
    double r2 = x.squaredNorm();
    return 0.3 * x[1] * x[2] / (r2 * r2);
  };
  auto corr_rot = [=](const Vec& x) {
    Vec y = x;
    y[1] = std::cos(ang) * x[1] - std::sin(ang) * x[2];
    y[2] = std::sin(ang) * x[1] + std::cos(ang) * x[2];
    return corr(y);
  };
  ConformalFactor f1 = ConformalFactor(n, 1.0).with_correction(testing::fd_scalar(corr, n, 1e-3));
  ConformalFactor f2 =
      ConformalFactor(n, 1.0).with_correction(testing::fd_scalar(corr_rot, n, 1e-3));
  auto g1 = MetricField::conformally_flat(Chart::half_space(n), f1);
  auto g2 = MetricField::conformally_flat(Chart::half_space(n), f2);
  double m1 = adm_mass_at_radius(g1, 30.0, 1e-9);
  double m2 = adm_mass_at_radius(g2, 30.0, 1e-9);
  REQUIRE(m1 == Approx(m2).margin(1e-6 * (1 + std::abs(m1))));
}

TEST_CASE("extrapolation rejects scatter without a trend") {
  auto noisy = MetricField::flat(Chart::half_space(3));
  // hand-build a report through the fitting path by perturbing values is not
  // possible from outside; instead check the error type on a synthetic field
  // whose sweep is pure noise at finite amplitude.
  TensorFieldFn gamma = testing::random_trig_tensor(3, 3, 1.0);
  (void)noisy;
  (void)gamma;
  std::vector<double> radii{10, 20, 40, 80};
  // direct check of the fitting helper
  std::vector<double> vals{0.1, -0.09, 0.11, -0.1};
  auto fit = lab::detail::fit_power_tail(radii, vals, 6.0);
  REQUIRE(fit.residual > 0.5 * 0.21);
}

TEST_CASE("boundary mass flux") {
  const int n = 4;
  AnnulusGrid grid;
  grid.d = 3;
  grid.rho_in = 1.0;
  grid.rho_out = 16.0;
  grid.n_xi = 96;
  grid.n_th = 24;
  GraphSurface s(n, grid, ConformalFactor(n, 0.0));
  GraphGeometry geo(s);

  SECTION("constant field has zero flux") {
    ReducedField u(grid, 1.0, +1);
    REQUIRE(boundary_mass_flux(geo, u, 8.0) == Approx(0.0).margin(1e-14));
  }
  SECTION("power-law field reproduces the closed form") {
    // u = 1 + a1 rho^(3-n); flux = -4 a1 (3-n) sigma^(2-n) * area(half S^(n-2))
    double a1 = 2.0;
    ReducedField u(grid, 0.0, +1);
    for (int i = 0; i <= grid.n_xi; ++i)
      for (int j = 0; j <= grid.n_th; ++j)
        u.at(i, j) = 1.0 + a1 * std::pow(grid.rho(i), 3.0 - n);
    double sigma = 8.0;
    double expected = -4.0 * a1 * (3.0 - n) * std::pow(sigma, 2.0 - n) * 0.5 *
                      sphere_area(n - 1) * std::pow(sigma, n - 2.0);
    REQUIRE(expected == Approx(8.0 * std::numbers::pi * a1).epsilon(1e-12));
    REQUIRE(boundary_mass_flux(geo, u, sigma) == Approx(expected).epsilon(1e-3));
  }
  SECTION("bump beyond the support does not change the flux") {
    double a1 = -1.5;
    ReducedField u(grid, 0.0, +1), ub(grid, 0.0, +1);
    for (int i = 0; i <= grid.n_xi; ++i)
      for (int j = 0; j <= grid.n_th; ++j) {
        double base = 1.0 + a1 * std::pow(grid.rho(i), 3.0 - n);
        u.at(i, j) = base;
        double rho = grid.rho(i);
        double bump = (rho < 4.0) ? sq(std::max(0.0, 1.0 - sq(rho - 2.5) / 2.25)) : 0.0;
        ub.at(i, j) = base + 0.7 * bump;
      }
    double f1 = boundary_mass_flux(geo, u, 10.0);
    double f2 = boundary_mass_flux(geo, ub, 10.0);
    REQUIRE(f1 == Approx(f2).margin(1e-12));
  }
  SECTION("radius outside the annulus is rejected") {
    ReducedField u(grid, 1.0, +1);
    REQUIRE_THROWS_AS(boundary_mass_flux(geo, u, 20.0), RadiusOutsideAnnulus);
  }
}
