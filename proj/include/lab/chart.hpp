#ifndef LAB_CHART_HPP
#define LAB_CHART_HPP

#include <cmath>
#include <numbers>
#include <string>

#include "lab/common.hpp"

namespace lab {

// The three chart types the lab works on.
//  HalfSpace:   R^n_+ = {x1 >= 0}, boundary {x1 = 0}.
//  TorusSlab:   T^(n-1) x [0,1]; coordinates 1..n-1 periodic, x_n in [0,1],
//               boundary {x_n = 0} and {x_n = 1}.
//  HalfAnnulus: {rho_in <= |x| <= rho_out, x1 >= 0} in R^d, represented on a
//               2D (log rho, theta) grid; for d >= 3 fields are invariant
//               under rotations fixing the x1 axis and carry an S^(d-2) fiber.
enum class ChartKind { HalfSpace, TorusSlab, HalfAnnulus };

struct Chart {
  ChartKind kind = ChartKind::HalfSpace;
  int n = 3;       // manifold dimension
  Vec periods;     // TorusSlab only, size n-1

  static Chart half_space(int n) { return {ChartKind::HalfSpace, n, Vec()}; }
  static Chart torus_slab(int n, const Vec& periods) {
    return {ChartKind::TorusSlab, n, periods};
  }
  static Chart torus_slab(int n) {
    return {ChartKind::TorusSlab, n, Vec::Ones(n - 1)};
  }
  static Chart half_annulus(int d) { return {ChartKind::HalfAnnulus, d, Vec()}; }

  bool contains(const Vec& x) const {
    if (x.size() != n) return false;
    switch (kind) {
      case ChartKind::HalfSpace:
        return x[0] >= -1e-14;
      case ChartKind::TorusSlab:
        return x[n - 1] >= -1e-14 && x[n - 1] <= 1.0 + 1e-14;
      case ChartKind::HalfAnnulus:
        return x[0] >= -1e-14;  // radial bounds live with the grid
    }
    return false;
  }

  void require_inside(const Vec& x) const {
    if (!contains(x)) throw PointOutsideChart("point outside chart domain");
  }

  // True if x lies on the chart boundary (where H, A, B are defined).
  bool on_boundary(const Vec& x, double tol = 1e-12) const {
    switch (kind) {
      case ChartKind::HalfSpace:
      case ChartKind::HalfAnnulus:
        return std::abs(x[0]) <= tol;
      case ChartKind::TorusSlab:
        return std::abs(x[n - 1]) <= tol || std::abs(x[n - 1] - 1.0) <= tol;
    }
    return false;
  }

  // Index of the coordinate normal to the boundary and the outward sign.
  // HalfSpace: boundary {x1=0}, outward is -e1.
  std::pair<int, double> boundary_axis(const Vec& x) const {
    switch (kind) {
      case ChartKind::HalfSpace:
      case ChartKind::HalfAnnulus:
        return {0, -1.0};
      case ChartKind::TorusSlab:
        return {n - 1, x[n - 1] < 0.5 ? -1.0 : +1.0};
    }
    return {0, -1.0};
  }
};

// Structured grid over the half-annulus {rho_in <= |x| <= rho_out, x1 >= 0}
// in R^d.  Radial nodes are uniform in xi = log(rho); the angle theta from
// the x1-axis is uniform.  For d = 2 theta spans [-pi/2, pi/2] and both ends
// are free boundary; for d >= 3 fields are invariant under the S^(d-2) fiber,
// theta spans (0, pi/2] with the axis end staggered off theta = 0 and only
// theta = pi/2 on the free boundary.
struct AnnulusGrid {
  int d = 2;
  double rho_in = 1.0, rho_out = 4.0;
  int n_xi = 32, n_th = 16;  // cell counts; nodes are 0..n_xi, 0..n_th

  double xi0() const { return std::log(rho_in); }
  double dxi() const { return (std::log(rho_out) - std::log(rho_in)) / n_xi; }
  double dth() const {
    if (d == 2) return std::numbers::pi / n_th;
    return 0.5 * std::numbers::pi / (n_th + 0.5);
  }
  double th0() const {
    if (d == 2) return -0.5 * std::numbers::pi;
    return 0.5 * dth();
  }
  double xi(int i) const { return xi0() + i * dxi(); }
  double rho(int i) const { return std::exp(xi(i)); }
  double theta(int j) const { return th0() + j * dth(); }

  int nodes() const { return (n_xi + 1) * (n_th + 1); }
  int id(int i, int j) const { return i * (n_th + 1) + j; }

  bool on_free_boundary(int j) const {
    return j == n_th || (d == 2 && j == 0);
  }
  bool at_axis(int j) const { return d >= 3 && j == 0; }

  int fiber_dim() const { return d - 2; }
  // Total measure of the fiber: |S^(d-2)| for d >= 3, 1 for d = 2.
  double fiber_area() const { return d >= 3 ? sphere_area(d - 1) : 1.0; }
};

}  // namespace lab

#endif  // LAB_CHART_HPP
