#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "lab/graph_solver.hpp"
#include "lab/surface_ops.hpp"

using namespace lab;
using Catch::Approx;

namespace {

AnnulusGrid make_grid(int d, double rin, double rout, int nxi, int nth) {
  AnnulusGrid g;
  g.d = d;
  g.rho_in = rin;
  g.rho_out = rout;
  g.n_xi = nxi;
  g.n_th = nth;
  return g;
}

// analytic quasilinear operator for manufactured solutions built from
// closed-form polar jets (independent of the grid stencils)
struct PolarJet {
  double f, fr, ft, frr, frt, ftt;
};

double analytic_operator(int n, const ConformalFactor& h, double rho, double th,
                         const PolarJet& p) {
  const int d = n - 1;
  double c = std::cos(th), s = std::sin(th);
  double fa = c * p.fr - s * p.ft / rho;
  double fb = s * p.fr + c * p.ft / rho;
  double faa = c * c * p.frr - 2 * s * c * (p.frt / rho - p.ft / (rho * rho)) +
               s * s * (p.fr / rho + p.ftt / (rho * rho));
  double fbb = s * s * p.frr + 2 * s * c * (p.frt / rho - p.ft / (rho * rho)) +
               c * c * (p.fr / rho + p.ftt / (rho * rho));
  double fab = s * c * (p.frr - p.fr / rho - p.ftt / (rho * rho)) +
               (c * c - s * s) * (p.frt / rho - p.ft / (rho * rho));
  double W2 = 1 + fa * fa + fb * fb;
  double op = faa + fbb - (fa * fa * faa + 2 * fa * fb * fab + fb * fb * fbb) / W2;
  if (d >= 3) op += (d - 2) * fb / (rho * s);
  Vec x = Vec::Zero(n);
  x[0] = rho * c;
  x[1] = rho * s;
  x[n - 1] = p.f;
  ScalarJet hj = h.jet(x);
  op -= (2.0 * (n - 1) / (n - 2.0)) *
        (-fa * hj.grad[0] / hj.value - fb * hj.grad[1] / hj.value +
         hj.grad[n - 1] / hj.value);
  return op;
}

}  // namespace

TEST_CASE("residual of a constant height over flat ambient is exactly zero") {
  GraphSurface s(3, make_grid(2, 1.0, 8.0, 32, 24), ConformalFactor(3, 0.0));
  for (auto& v : s.heights().data()) v = 2.5;
  PdeResidual r = pde_residual(s);
  REQUIRE(r.max_interior == 0.0);
  REQUIRE(r.max_neumann == 0.0);
}

TEST_CASE("residual of a constant height over a conformal background") {
  const int n = 4;
  ConformalFactor h(n, 1.5);
  GraphSurface s(n, make_grid(3, 2.0, 16.0, 48, 16), ConformalFactor(n, 1.5));
  const double c = 0.8;
  for (auto& v : s.heights().data()) v = c;
  PdeResidual r = pde_residual(s);
  for (auto [i, j] : {std::pair{10, 5}, std::pair{30, 10}}) {
    Vec x = s.ambient_point(i, j);
    ScalarJet hj = h.jet(x);
    double expected = -(2.0 * (n - 1) / (n - 2.0)) * hj.grad[n - 1] / hj.value;
    REQUIRE(r.interior.at(i, j) == Approx(expected).margin(1e-12));
  }
}

TEST_CASE("trivial solves") {
  SECTION("flat, zero boundary height") {
    SolveOptions opt;
    auto s = solve_graph(3, make_grid(2, 1.0, 8.0, 32, 24), ConformalFactor(3, 0.0), opt);
    for (double v : s.heights().data()) REQUIRE(v == 0.0);
  }
  SECTION("flat, unit height on both rings: the vertical translate") {
    SolveOptions opt;
    opt.outer = 1.0;
    auto s = solve_graph(3, make_grid(2, 1.0, 8.0, 32, 24), ConformalFactor(3, 0.0), opt);
    for (double v : s.heights().data()) REQUIRE(v == Approx(1.0).margin(1e-11));
  }
}

TEST_CASE("manufactured solutions are recovered at second order") {
  auto run = [&](int n, int nxi, int nth) {
    const int d = n - 1;
    ConformalFactor h(n, 0.7);
    AnnulusGrid g = make_grid(d, 2.0, 8.0, nxi, nth);
    // smooth target satisfying the free-boundary condition exactly
    auto fstar = [&](double rho, double th) -> PolarJet {
      PolarJet p;
      double u = std::log(rho);
      double base = 0.3 * std::sin(u), dbase = 0.3 * std::cos(u) / rho,
             ddbase = (-0.3 * std::sin(u) - 0.3 * std::cos(u)) / (rho * rho);
      double amp = 0.2 + 0.1 * std::cos(u), damp = -0.1 * std::sin(u) / rho,
             ddamp = (-0.1 * std::cos(u) + 0.1 * std::sin(u)) / (rho * rho);
      double ang, dang, ddang;
      if (d == 2) {
        ang = std::sin(th);
        dang = std::cos(th);
        ddang = -std::sin(th);
      } else {
        ang = sq(std::cos(th));
        dang = -std::sin(2 * th);
        ddang = -2 * std::cos(2 * th);
      }
      p.f = base + amp * ang;
      p.fr = dbase + damp * ang;
      p.ft = amp * dang;
      p.frr = ddbase + ddamp * ang;
      p.frt = damp * dang;
      p.ftt = amp * ddang;
      return p;
    };
    ReducedField forcing(g, 0.0, +1);
    for (int i = 0; i <= g.n_xi; ++i)
      for (int j = 0; j <= g.n_th; ++j)
        forcing.at(i, j) = analytic_operator(n, h, g.rho(i), g.theta(j),
                                             fstar(g.rho(i), g.theta(j)));
    SolveOptions opt;
    opt.forcing = &forcing;
    opt.outer_profile = [&](double th) { return fstar(g.rho_out, th).f; };
    opt.inner_profile = [&](double th) { return fstar(g.rho_in, th).f; };
    auto s = solve_graph(n, g, h, opt);
    double err = 0;
    for (int i = 0; i <= g.n_xi; ++i)
      for (int j = 0; j <= g.n_th; ++j)
        err = std::max(err, std::abs(s.heights().at(i, j) - fstar(g.rho(i), g.theta(j)).f));
    return err;
  };
  for (int n : {3, 4}) {
    double coarse = run(n, 24, 16);
    double fine = run(n, 48, 32);
    INFO("n = " << n << " coarse " << coarse << " fine " << fine);
    REQUIRE(fine < 0.35 * coarse);
  }
}

TEST_CASE("solved graphs are discretely minimal in the surface module sense") {
  SolveOptions opt;
  opt.outer = 1.0;
  ConformalFactor h(4, -1.0);
  auto s = solve_graph(4, make_grid(3, 2.0, 16.0, 64, 12), h, opt);
  GraphGeometry geo(s);
  // the solver residual and H are the same function of the same jets
  REQUIRE(geo.max_abs_H() < 1e-9);
  PdeResidual r = pde_residual(s);
  REQUIRE(r.max_neumann < 1e-11);
  // random admissible variation: first variation at solver-tolerance scale
  auto X = [&](const Vec& x) -> Vec {
    double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    double ss = (std::log(rho) - std::log(2.0)) / (std::log(16.0) - std::log(2.0));
    Vec v = Vec::Zero(4);
    if (ss <= 0 || ss >= 1) return v;
    double w = sq(std::sin(std::numbers::pi * ss));
    v[0] = 0.2 * w * x[0];
    v[1] = 0.3 * w;
    v[3] = 0.5 * w;
    return v;
  };
  auto var = make_variation(geo, X);
  REQUIRE(std::abs(first_variation(geo, var)) < 1e-6);
}

TEST_CASE("synthetic decay fits recover exact model data") {
  SECTION("power law, n = 4") {
    GraphSurface s(4, make_grid(3, 1.0, 32.0, 64, 8), ConformalFactor(4, 0.0));
    for (int i = 0; i <= s.grid().n_xi; ++i)
      for (int j = 0; j <= s.grid().n_th; ++j)
        s.heights().at(i, j) = 1.0 + 2.0 / s.grid().rho(i);
    DecayFit f = decay_fit(s);
    REQUIRE(f.a0 == Approx(1.0).margin(1e-6));
    REQUIRE(f.a1 == Approx(2.0).margin(1e-4));
    REQUIRE(f.s == Approx(-1.0).margin(1e-4));
    REQUIRE(f.residual < 1e-8);
  }
  SECTION("constant, n = 3") {
    GraphSurface s(3, make_grid(2, 1.0, 32.0, 64, 8), ConformalFactor(3, 0.0));
    for (auto& v : s.heights().data()) v = 5.0;
    DecayFit f = decay_fit(s);
    REQUIRE(f.a0 == Approx(5.0).margin(1e-12));
    REQUIRE(f.a1 == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("negative-mass background: decay exponent and coefficient sign") {
  SECTION("decaying profile isolates the harmonic tail exponent") {
    ConformalFactor h(4, -1.0);
    SolveOptions opt;
    opt.outer = 0.0;
    opt.inner = 1.0;
    auto s = solve_graph(4, make_grid(3, 1.0, 64.0, 160, 12), h, opt);
    DecayFit f = decay_fit(s);
    INFO("s = " << f.s << " a1 = " << f.a1);
    REQUIRE(std::abs(f.s - (3.0 - 4.0)) < 0.05);
  }
  SECTION("equal-height rings: a1 sign follows the mass parameter") {
    for (double m : {-2.0, -1.0, 1.0, 2.0}) {
      ConformalFactor h(4, m);
      SolveOptions opt;
      opt.outer = 1.0;
      // rho_in clear of the h > 0 region's edge for the m = -2 background
      auto s = solve_graph(4, make_grid(3, 1.4, 64.0, 96, 10), h, opt);
      DecayFit f = decay_fit(s);
      INFO("m = " << m << " a1 = " << f.a1);
      REQUIRE(f.a1 * m > 0.0);
    }
  }
}

TEST_CASE("solution refinement converges at second order against the finest grid") {
  ConformalFactor h(3, 1.0);
  SolveOptions opt;
  opt.outer = 0.5;
  auto solve_at = [&](int nxi, int nth) {
    return solve_graph(3, make_grid(2, 2.0, 16.0, nxi, nth), h, opt);
  };
  auto fine = solve_at(96, 64);
  double e1 = 0, e2 = 0;
  {
    auto s = solve_at(24, 16);
    for (int i = 0; i <= 24; ++i)
      for (int j = 0; j <= 16; ++j)
        e1 = std::max(e1, std::abs(s.heights().at(i, j) - fine.heights().at(4 * i, 4 * j)));
  }
  {
    auto s = solve_at(48, 32);
    for (int i = 0; i <= 48; ++i)
      for (int j = 0; j <= 32; ++j)
        e2 = std::max(e2, std::abs(s.heights().at(i, j) - fine.heights().at(2 * i, 2 * j)));
  }
  REQUIRE(e2 < 0.35 * e1);
}
