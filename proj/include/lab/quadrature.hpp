#ifndef LAB_QUADRATURE_HPP
#define LAB_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "lab/common.hpp"

namespace lab {

struct Quad1D {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_m.
inline Quad1D gauss_legendre(int m) {
  Quad1D q;
  q.nodes.resize(m);
  q.weights.resize(m);
  const double pi = std::numbers::pi;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = x;
    q.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return q;
}

// Quadrature points on the unit sphere S^(n-1) in R^n, optionally restricted
// to the hemisphere {x1 >= 0}.  Polar angles get Gauss-Legendre nodes, the
// final periodic angle a uniform (trapezoidal) rule.
struct SpherePoint {
  Vec x;          // unit vector in R^n
  double weight;  // includes the full surface measure factor
};

inline std::vector<SpherePoint> sphere_rule(int n, int level, bool hemisphere) {
  std::vector<SpherePoint> pts;
  if (n == 2) {
    // circle (or half-circle x1 >= 0)
    int m = 4 * level;
    double lo = hemisphere ? -0.5 * std::numbers::pi : 0.0;
    double span = hemisphere ? std::numbers::pi : 2.0 * std::numbers::pi;
    for (int i = 0; i < m; ++i) {
      double phi = lo + span * (i + 0.5) / m;
      Vec x(2);
      x << std::cos(phi), std::sin(phi);
      pts.push_back({x, span / m});
    }
    return pts;
  }
  // Angles t_1..t_{n-2} in [0,pi], final phi in [0,2pi); weight includes
  // prod sin^(n-1-k)(t_k).  Hemisphere restricts t_1 to [0, pi/2] since
  // x1 = cos(t_1).
  int npolar = n - 2;
  std::vector<Quad1D> rules(npolar);
  for (int k = 0; k < npolar; ++k) rules[k] = gauss_legendre(2 * level);
  int mphi = 4 * level;

  std::vector<int> idx(npolar, 0);
  while (true) {
    double w = 1.0;
    std::vector<double> t(npolar);
    for (int k = 0; k < npolar; ++k) {
      double span = (k == 0 && hemisphere) ? 0.5 * std::numbers::pi : std::numbers::pi;
      double a = 0.5 * span * (rules[k].nodes[idx[k]] + 1.0);
      t[k] = a;
      w *= 0.5 * span * rules[k].weights[idx[k]] * std::pow(std::sin(a), n - 2 - k);
    }
    for (int ip = 0; ip < mphi; ++ip) {
      double phi = 2.0 * std::numbers::pi * (ip + 0.5) / mphi;
      Vec x(n);
      double s = 1.0;
      for (int k = 0; k < npolar; ++k) {
        x[k] = s * std::cos(t[k]);
        s *= std::sin(t[k]);
      }
      x[n - 2] = s * std::cos(phi);
      x[n - 1] = s * std::sin(phi);
      pts.push_back({x, w * 2.0 * std::numbers::pi / mphi});
    }
    int k = npolar - 1;
    while (k >= 0 && ++idx[k] == static_cast<int>(rules[k].nodes.size())) idx[k--] = 0;
    if (k < 0) break;
  }
  return pts;
}

// Integrate f over the sphere/hemisphere of radius r in R^n with node
// doubling until two successive levels agree to tol.
inline double integrate_sphere(int n, double r, bool hemisphere,
                               const std::function<double(const Vec&)>& f,
                               double tol = 1e-8, int level0 = 6, int max_level = 96) {
  double prev = 0.0;
  bool have_prev = false;
  for (int level = level0; level <= max_level; level *= 2) {
    double acc = 0.0;
    for (const auto& p : sphere_rule(n, level, hemisphere)) {
      Vec x = r * p.x;
      acc += f(x) * p.weight;
    }
    acc *= std::pow(r, n - 1);
    if (have_prev && std::abs(acc - prev) <= tol * (1.0 + std::abs(acc))) return acc;
    prev = acc;
    have_prev = true;
  }
  throw QuadratureNotConverged("sphere integral did not settle under node doubling");
}

}  // namespace lab

#endif  // LAB_QUADRATURE_HPP
