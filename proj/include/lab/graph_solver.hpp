#ifndef LAB_GRAPH_SOLVER_HPP
#define LAB_GRAPH_SOLVER_HPP

#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lab/graph_surface.hpp"
#include "lab/mass.hpp"

namespace lab {

// Pointwise residual of the quasilinear minimal-graph operator
//   sum_ij (delta_ij - f_i f_j / W^2) f_ij
//     - (2(n-1)/(n-2)) * W * d_{nu0} log h = 0
// with W^2 = 1 + |df|^2 and nu0 = W^-1 (-df, 1); on free-boundary nodes the
// Neumann datum d_1 f.
struct PdeResidual {
  ReducedField interior;  // operator residual (zero at Dirichlet rings)
  ReducedField neumann;   // d_1 f on free nodes
  double max_interior = 0, max_neumann = 0;
};

namespace graphdetail {

inline double quasilinear_operator(const GraphSurface& s, int i, int j) {
  const int n = s.ambient_dimension();
  const int d = s.grid().d;
  GraphSurface::HeightJet fj = s.height_jet(i, j);
  const double W2 = 1.0 + sq(fj.fa) + sq(fj.fb);
  double op = fj.faa + fj.fbb - (sq(fj.fa) * fj.faa + 2.0 * fj.fa * fj.fb * fj.fab +
                                 sq(fj.fb) * fj.fbb) / W2;
  if (d >= 3) {
    double b = s.grid().rho(i) * std::sin(s.grid().theta(j));
    op += (d - 2) * fj.fb / b;
  }
  // conformal term: W d_{nu0} log h = -fa La - fb Lb + Ln with L = grad log h.
  // The sign pairs with H = -div(grad f / W) for the upward normal, so that
  // solutions have vanishing mean curvature under the B = <nabla nu, .>
  // convention (checked against the direct curvature of solved graphs).
  Vec x = s.ambient_point(i, j);
  ScalarJet h = s.factor().jet(x);
  double La = h.grad[0] / h.value;
  double Lb = h.grad[1] / h.value;
  double Ln = h.grad[n - 1] / h.value;
  op -= (2.0 * (n - 1) / (n - 2.0)) * (-fj.fa * La - fj.fb * Lb + Ln);
  return op;
}

}  // namespace graphdetail

inline PdeResidual pde_residual(const GraphSurface& s, const ReducedField* forcing = nullptr) {
  const AnnulusGrid& g = s.grid();
  PdeResidual r;
  r.interior = ReducedField(g, 0.0, +1);
  r.neumann = ReducedField(g, 0.0, +1);
  for (int i = 1; i < g.n_xi; ++i)
    for (int j = 0; j <= g.n_th; ++j) {
      if (s.tag(i, j) == NodeTag::Free) {
        double v = s.normal_derivative(i, j);
        r.neumann.at(i, j) = v;
        r.max_neumann = std::max(r.max_neumann, std::abs(v));
      } else {
        double v = graphdetail::quasilinear_operator(s, i, j);
        if (forcing) v -= forcing->at(i, j);
        r.interior.at(i, j) = v;
        r.max_interior = std::max(r.max_interior, std::abs(v));
      }
    }
  return r;
}

struct SolveOptions {
  double outer = 0.0;                     // Dirichlet height at rho_out
  std::optional<double> inner;            // Dirichlet at rho_in (default: outer)
  std::function<double(double)> outer_profile;  // optional theta-dependent data
  std::function<double(double)> inner_profile;
  const ReducedField* forcing = nullptr;  // manufactured-solution source
  const GraphSurface* init = nullptr;     // initial guess (default zero heights)
  double tol = 1e-10;
  int max_iterations = 60;
  int max_backtracks = 30;
};

// Damped Newton on the discretized quasilinear system with the Neumann
// condition folded into the boundary rows.
inline GraphSurface solve_graph(int n, const AnnulusGrid& grid, const ConformalFactor& h,
                                const SolveOptions& opt = {}) {
  GraphSurface s(n, grid, h);
  double inner_h = opt.inner.value_or(opt.outer);
  for (int j = 0; j <= grid.n_th; ++j) {
    s.heights().at(grid.n_xi, j) =
        opt.outer_profile ? opt.outer_profile(grid.theta(j)) : opt.outer;
    s.heights().at(0, j) = opt.inner_profile ? opt.inner_profile(grid.theta(j)) : inner_h;
  }
  if (opt.init) {
    s.heights() = opt.init->heights();
  } else {
    // start from the log-radial blend of the ring heights; jumps at the
    // rings send Newton to spurious kinked branches of the discrete system
    double inner_mean = 0, outer_mean = 0;
    for (int j = 0; j <= grid.n_th; ++j) {
      inner_mean += s.heights().at(0, j);
      outer_mean += s.heights().at(grid.n_xi, j);
    }
    inner_mean /= grid.n_th + 1;
    outer_mean /= grid.n_th + 1;
    for (int i = 1; i < grid.n_xi; ++i) {
      double t = double(i) / grid.n_xi;
      for (int j = 0; j <= grid.n_th; ++j)
        s.heights().at(i, j) = (1.0 - t) * inner_mean + t * outer_mean;
    }
  }

  // unknowns: all nodes except the Dirichlet rings
  std::vector<int> unknown_of_node(grid.nodes(), -1);
  std::vector<std::pair<int, int>> node_of_unknown;
  for (int i = 1; i < grid.n_xi; ++i)
    for (int j = 0; j <= grid.n_th; ++j) {
      unknown_of_node[grid.id(i, j)] = static_cast<int>(node_of_unknown.size());
      node_of_unknown.push_back({i, j});
    }
  const int m = static_cast<int>(node_of_unknown.size());

  auto residual_vec = [&](GraphSurface& surf) {
    PdeResidual r = pde_residual(surf, opt.forcing);
    Vec R(m);
    for (int k = 0; k < m; ++k) {
      auto [i, j] = node_of_unknown[k];
      R[k] = surf.tag(i, j) == NodeTag::Free ? r.neumann.at(i, j) : r.interior.at(i, j);
    }
    return R;
  };

  const double spacing = std::min(grid.dxi(), grid.dth());
  auto tol_of = [&](const GraphSurface& surf) {
    double fmax = 0;
    for (double v : surf.heights().data()) fmax = std::max(fmax, std::abs(v));
    return opt.tol * (1.0 + fmax / (spacing * spacing));
  };

  Vec R = residual_vec(s);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (R.cwiseAbs().maxCoeff() <= tol_of(s)) return s;

    // Jacobian by grid coloring; residual stencils reach at most 2 nodes
    const int stride = 5;
    std::vector<Eigen::Triplet<double>> trip;
    double fscale = 0;
    for (double v : s.heights().data()) fscale = std::max(fscale, std::abs(v));
    const double eps = 1e-7 * (1.0 + fscale);
    for (int ci = 0; ci < stride; ++ci)
      for (int cj = 0; cj < stride; ++cj) {
        GraphSurface pp = s, pm = s;
        std::vector<int> touched;
        for (int k = 0; k < m; ++k) {
          auto [i, j] = node_of_unknown[k];
          if (i % stride == ci && j % stride == cj) {
            pp.heights().at(i, j) += eps;
            pm.heights().at(i, j) -= eps;
            touched.push_back(k);
          }
        }
        if (touched.empty()) continue;
        Vec Rp = residual_vec(pp);
        Vec Rm = residual_vec(pm);
        for (int k = 0; k < m; ++k) {
          double dv = (Rp[k] - Rm[k]) / (2.0 * eps);
          if (dv == 0.0) continue;
          auto [ri, rj] = node_of_unknown[k];
          // attribute to the unique touched column within stencil range
          for (int t : touched) {
            auto [ti, tj] = node_of_unknown[t];
            if (std::abs(ti - ri) <= 2 && std::abs(tj - rj) <= 2) {
              trip.emplace_back(k, t, dv);
              break;
            }
          }
        }
      }
    Eigen::SparseMatrix<double> J(m, m);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success)
      throw SolveSingular("newton jacobian factorization failed");
    Vec delta = lu.solve(-R);
    double fscale2 = 0;
    for (double v : s.heights().data()) fscale2 = std::max(fscale2, std::abs(v));
    double cap = 1.0 + fscale2;
    if (delta.cwiseAbs().maxCoeff() > cap) delta *= cap / delta.cwiseAbs().maxCoeff();

    double base = R.norm();
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      GraphSurface trial = s;
      for (int k = 0; k < m; ++k) {
        auto [i, j] = node_of_unknown[k];
        trial.heights().at(i, j) += lambda * delta[k];
      }
      Vec Rt = residual_vec(trial);
      if (Rt.norm() < base || Rt.cwiseAbs().maxCoeff() <= tol_of(trial)) {
        s = trial;
        R = Rt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) throw NewtonDiverged("backtracking exhausted without descent");
  }
  if (R.cwiseAbs().maxCoeff() <= tol_of(s)) return s;
  throw MaxIterations("newton did not converge in the iteration budget");
}

// ---------------------------------------------------------------------------
// Decay-rate fit of the angular-averaged profile:
//   n >= 4:  f ~ a0 + a1 rho^s  (s free; the decay lemma gives s -> 3-n)
//   n  = 3:  f ~ a0 + a1 log rho
// ---------------------------------------------------------------------------

struct DecayFit {
  double a0 = 0, a1 = 0, s = 0, residual = 0;
  double rho1 = 0, rho2 = 0;  // fit window
  std::string model;
};

inline DecayFit decay_fit(const GraphSurface& surf) {
  const AnnulusGrid& g = surf.grid();
  const int n = surf.ambient_dimension();
  // measure-weighted angular average
  std::vector<double> avg(g.n_xi + 1, 0.0);
  for (int i = 0; i <= g.n_xi; ++i) {
    double wsum = 0, acc = 0;
    for (int j = 0; j <= g.n_th; ++j) {
      double w = (j == 0 || j == g.n_th) ? 0.5 : 1.0;
      if (g.d >= 3) {
        w = (j == g.n_th) ? 0.5 : 1.0;
        w *= std::pow(std::sin(g.theta(j)), g.d - 2);
      }
      wsum += w;
      acc += w * surf.heights().at(i, j);
    }
    avg[i] = acc / wsum;
  }
  // window: the outer quarter of the annulus in log radius (inside the
  // outer half; deep enough that the forced rho^(2-n) tail has decayed)
  int i1 = (3 * g.n_xi) / 4;
  int i2 = g.n_xi;
  if (i2 - i1 + 1 < 8) throw FitIllConditioned("need at least 8 radial samples in the window");
  std::vector<double> rr(avg.begin() + i1, avg.begin() + i2 + 1);
  std::vector<double> rho(i2 - i1 + 1);
  for (int k = 0; k <= i2 - i1; ++k) rho[k] = g.rho(i1 + k);

  DecayFit fit;
  fit.rho1 = rho.front();
  fit.rho2 = rho.back();
  const int rows = static_cast<int>(rho.size());
  if (n == 3) {
    Mat X(rows, 2);
    Vec y(rows);
    for (int k = 0; k < rows; ++k) {
      X(k, 0) = 1.0;
      X(k, 1) = std::log(rho[k]);
      y[k] = rr[k];
    }
    Vec beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    fit.a0 = beta[0];
    fit.a1 = beta[1];
    fit.s = 0.0;
    fit.residual = (X * beta - y).norm();
    fit.model = "a0 + a1 log rho";
  } else {
    auto pf = detail::fit_power_tail(rho, rr, 2.0 * n);
    fit.a0 = pf.c0;
    fit.a1 = pf.b;
    fit.s = -pf.s;  // model a0 + a1 rho^s with s < 0
    fit.residual = pf.residual;
    fit.model = "a0 + a1 rho^s";
  }
  return fit;
}

}  // namespace lab

#endif  // LAB_GRAPH_SOLVER_HPP
