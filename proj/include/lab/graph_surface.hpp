#ifndef LAB_GRAPH_SURFACE_HPP
#define LAB_GRAPH_SURFACE_HPP

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lab/chart.hpp"
#include "lab/common.hpp"
#include "lab/conformal_factor.hpp"
#include "lab/metric_field.hpp"
#include "lab/reduced_field.hpp"

namespace lab {

enum class NodeTag { Interior, FixedOuter, FixedInner, Free, Axis };

// Height function over the half-annulus {rho_in <= |x'| <= rho_out, x1 >= 0}
// in R^(n-1), graph of a hypersurface in the conformally flat half-space
// (R^n_+, h^(4/(n-2)) delta).  For n >= 4 the surface is invariant under the
// rotations fixing the x1 axis, so the grid is the reduced (log rho, theta)
// chart with an S^(n-3) fiber.  Ambient vectors are kept in the adapted
// frame (e_a, e_b, fiber..., e_n) with a = x1 and b the fiber radius.
class GraphSurface {
 public:
  GraphSurface(int n, const AnnulusGrid& grid, ConformalFactor h)
      : n_(n), grid_(grid), h_(std::move(h)), f_(grid, 0.0, +1) {
    if (grid.d != n - 1) throw ConfigInvalid("annulus grid dimension must be n-1");
  }

  int ambient_dimension() const { return n_; }
  const AnnulusGrid& grid() const { return grid_; }
  const ConformalFactor& factor() const { return h_; }
  const ReducedField& heights() const { return f_; }
  ReducedField& heights() { return f_; }

  NodeTag tag(int i, int j) const {
    if (i == 0) return NodeTag::FixedInner;
    if (i == grid_.n_xi) return NodeTag::FixedOuter;
    if (grid_.on_free_boundary(j)) return NodeTag::Free;
    if (grid_.at_axis(j)) return NodeTag::Axis;
    return NodeTag::Interior;
  }

  // Cartesian-adapted 2-jet of f at a node: derivatives w.r.t. a = x1 and
  // b (fiber radius / signed x2 for n = 3), by the polar chain rule.
  struct HeightJet {
    double f;
    double fa, fb;
    double faa, fab, fbb;
    double f_xi, f_th;  // grid-coordinate first derivatives
  };

  HeightJet height_jet(int i, int j) const {
    GridJet gj = f_.jet(i, j);
    const double rho = grid_.rho(i), th = grid_.theta(j);
    // xi = log rho:  f_rho = f_xi / rho etc.
    const double fr = gj.vx / rho;
    const double frr = (gj.vxx - gj.vx) / (rho * rho);
    const double frt = gj.vxt / rho;
    const double ft = gj.vt, ftt = gj.vtt;
    const double c = std::cos(th), s = std::sin(th);
    HeightJet h;
    h.f = gj.v;
    h.f_xi = gj.vx;
    h.f_th = gj.vt;
    h.fa = c * fr - s * ft / rho;
    h.fb = s * fr + c * ft / rho;
    h.faa = c * c * frr - 2 * s * c * (frt / rho - ft / (rho * rho)) +
            s * s * (fr / rho + ftt / (rho * rho));
    h.fbb = s * s * frr + 2 * s * c * (frt / rho - ft / (rho * rho)) +
            c * c * (fr / rho + ftt / (rho * rho));
    h.fab = s * c * (frr - fr / rho - ftt / (rho * rho)) +
            (c * c - s * s) * (frt / rho - ft / (rho * rho));
    return h;
  }

  // Ambient point of a node in full coordinates, with the fiber direction
  // placed along e_2 (any representative is equivalent by invariance).
  Vec ambient_point(int i, int j) const {
    Vec x = Vec::Zero(n_);
    const double rho = grid_.rho(i), th = grid_.theta(j);
    x[0] = rho * std::cos(th);
    x[1] = rho * std::sin(th);
    x[n_ - 1] = f_.at(i, j);
    if (std::abs(x[0]) < 1e-13 * rho) x[0] = 0.0;
    return x;
  }

  // Discrete Neumann data d_1 f at a free-boundary node.
  double normal_derivative(int i, int j) const {
    if (!grid_.on_free_boundary(j)) throw DegenerateStencil("not a free node");
    return height_jet(i, j).fa;
  }

  MetricField ambient_metric() const {
    return MetricField::conformally_flat(Chart::half_space(n_), h_);
  }

 private:
  int n_;
  AnnulusGrid grid_;
  ConformalFactor h_;
  ReducedField f_;
};

// CSV grid serialization: header row with the geometry, then one row per
// node (i, j, rho, theta, f).
inline void write_graph_csv(const GraphSurface& g, std::ostream& os) {
  const AnnulusGrid& gr = g.grid();
  os << "# n=" << g.ambient_dimension() << " d=" << gr.d << " rho_in=" << gr.rho_in
     << " rho_out=" << gr.rho_out << " n_xi=" << gr.n_xi << " n_th=" << gr.n_th
     << " m=" << g.factor().mass_parameter() << "\n";
  os << "i,j,rho,theta,f\n";
  os.precision(17);
  for (int i = 0; i <= gr.n_xi; ++i)
    for (int j = 0; j <= gr.n_th; ++j)
      os << i << ',' << j << ',' << gr.rho(i) << ',' << gr.theta(j) << ','
         << g.heights().at(i, j) << "\n";
}

}  // namespace lab

#endif  // LAB_GRAPH_SURFACE_HPP
