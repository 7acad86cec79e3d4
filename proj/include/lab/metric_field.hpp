#ifndef LAB_METRIC_FIELD_HPP
#define LAB_METRIC_FIELD_HPP

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lab/chart.hpp"
#include "lab/common.hpp"
#include "lab/conformal_factor.hpp"
#include "lab/fields.hpp"
#include "lab/reduced_field.hpp"

namespace lab {

// Full 2-jet of the metric coefficients at a point.
struct MetricJet {
  Mat g;        // g_ij
  Tensor3 dg;   // dg(k,i,j)  = d_k g_ij
  Tensor4 d2g;  // d2g(k,l,i,j) = d_k d_l g_ij
};

using MetricFn = std::function<MetricJet(const Vec&)>;

inline int tri_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

// Metric coefficients sampled on a structured Cartesian grid.  Axes of a
// TorusSlab chart are periodic except the final slab axis; HalfSpace grids
// are plain boxes whose x1 = 0 face is the chart boundary.
struct ExplicitGrid {
  Vec origin;
  double spacing = 0.1;
  std::vector<int> dims;          // node count per axis
  std::vector<bool> periodic;     // per axis
  std::vector<double> coeff;      // node-major, n(n+1)/2 upper-triangle values

  int n() const { return static_cast<int>(dims.size()); }
  long node_count() const {
    long c = 1;
    for (int d : dims) c *= d;
    return c;
  }
  long flat(const std::vector<int>& idx) const {
    long f = 0;
    for (size_t a = 0; a < dims.size(); ++a) f = f * dims[a] + idx[a];
    return f;
  }
  double value(const std::vector<int>& idx, int i, int j) const {
    int nn = n();
    return coeff[flat(idx) * (nn * (nn + 1) / 2) + tri_index(i, j, nn)];
  }
  Vec node_point(const std::vector<int>& idx) const {
    Vec x = origin;
    for (size_t a = 0; a < dims.size(); ++a) x[a] += idx[a] * spacing;
    return x;
  }
};

// Reduced representation of a metric on the HalfAnnulus chart: the 2x2 block
// in (xi, theta) coordinates plus the fiber radius w (d >= 3).  Together they
// describe the invariant d-dimensional metric A + w^2 g_{S^(d-2)}.
struct ReducedMetric {
  AnnulusGrid grid;
  ReducedField a11, a12, a22, w;

  static ReducedMetric zero(const AnnulusGrid& g) {
    ReducedMetric m;
    m.grid = g;
    m.a11 = ReducedField(g, 0.0, +1);
    m.a12 = ReducedField(g, 0.0, -1);
    m.a22 = ReducedField(g, 0.0, +1);
    m.w = ReducedField(g, 0.0, +1);
    return m;
  }
};

struct ReducedMetricJet {
  Eigen::Matrix2d A;
  Eigen::Matrix2d dA[2];   // d/dxi, d/dtheta
  Eigen::Matrix2d d2A[3];  // xixi, xitheta, thetatheta
  GridJet w;               // fiber radius jet (d >= 3)
};

class MetricField {
 public:
  struct Flat {};
  struct ConformallyFlat {
    ConformalFactor factor;
  };
  struct Explicit {
    std::shared_ptr<const ExplicitGrid> grid;
  };
  struct Perturbed {
    std::shared_ptr<const MetricField> base;
    TensorFieldFn direction;
    double t = 0.0;
  };
  struct ClosedForm {
    MetricFn fn;
  };
  struct Reduced {
    std::shared_ptr<const ReducedMetric> data;
  };

  using Source = std::variant<Flat, ConformallyFlat, Explicit, Perturbed, ClosedForm, Reduced>;

  MetricField(Chart chart, Source src) : chart_(chart), src_(std::move(src)) {}

  static MetricField flat(Chart chart) { return MetricField(chart, Flat{}); }
  static MetricField conformally_flat(Chart chart, ConformalFactor f) {
    return MetricField(chart, ConformallyFlat{std::move(f)});
  }
  static MetricField explicit_grid(Chart chart, ExplicitGrid grid) {
    return MetricField(chart, Explicit{std::make_shared<ExplicitGrid>(std::move(grid))});
  }
  static MetricField perturbed(MetricField base, TensorFieldFn gamma, double t) {
    return MetricField(base.chart(),
                       Perturbed{std::make_shared<MetricField>(std::move(base)),
                                 std::move(gamma), t});
  }
  static MetricField closed_form(Chart chart, MetricFn fn) {
    return MetricField(chart, ClosedForm{std::move(fn)});
  }
  static MetricField reduced(ReducedMetric data) {
    Chart c = Chart::half_annulus(data.grid.d);
    return MetricField(c, Reduced{std::make_shared<ReducedMetric>(std::move(data))});
  }

  const Chart& chart() const { return chart_; }
  int dimension() const { return chart_.n; }
  bool is_reduced() const { return std::holds_alternative<Reduced>(src_); }
  const ReducedMetric& reduced_data() const { return *std::get<Reduced>(src_).data; }
  const Source& source() const { return src_; }

  const ConformalFactor* factor() const {
    if (auto* cf = std::get_if<ConformallyFlat>(&src_)) return &cf->factor;
    return nullptr;
  }

  MetricJet jet(const Vec& x) const {
    chart_.require_inside(x);
    MetricJet j = jet_impl(x);
    check_spd(j.g);
    return j;
  }

  ReducedMetricJet reduced_jet(int i, int j) const;

 private:
  MetricJet jet_impl(const Vec& x) const;
  void check_spd(const Mat& g) const {
    Eigen::LDLT<Mat> ldlt(g);
    double scale = g.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success ||
        (ldlt.vectorD().array() <= 1e-12 * scale).any())
      throw NonPositiveDefinite("metric not positive definite at queried point");
  }

  Chart chart_;
  Source src_;
};

inline ReducedMetricJet reduced_metric_jet(const ReducedMetric& m, int i, int j) {
  ReducedMetricJet out;
  GridJet j11 = m.a11.jet(i, j), j12 = m.a12.jet(i, j), j22 = m.a22.jet(i, j);
  auto fill = [&](auto get) {
    Eigen::Matrix2d M;
    M << get(j11), get(j12), get(j12), get(j22);
    return M;
  };
  out.A = fill([](const GridJet& a) { return a.v; });
  out.dA[0] = fill([](const GridJet& a) { return a.vx; });
  out.dA[1] = fill([](const GridJet& a) { return a.vt; });
  out.d2A[0] = fill([](const GridJet& a) { return a.vxx; });
  out.d2A[1] = fill([](const GridJet& a) { return a.vxt; });
  out.d2A[2] = fill([](const GridJet& a) { return a.vtt; });
  if (m.grid.d >= 3) out.w = m.w.jet(i, j);
  if (out.A.determinant() <= 0.0 || out.A(0, 0) <= 0.0)
    throw NonPositiveDefinite("reduced metric block not positive definite");
  return out;
}

inline ReducedMetricJet MetricField::reduced_jet(int i, int j) const {
  return reduced_metric_jet(reduced_data(), i, j);
}

namespace detail {

// Offsets/coefficients for a second-order 1D derivative stencil at node p of
// an axis with N nodes; one-sided at edges, wrapped on periodic axes.
struct Stencil {
  std::vector<int> offs;
  std::vector<double> coef;
};

inline Stencil stencil_1d(int p, int N, bool periodic, int order, double h) {
  if (periodic || (p >= 1 && p <= N - 2)) {
    if (order == 1) return {{-1, 1}, {-0.5 / h, 0.5 / h}};
    return {{-1, 0, 1}, {1 / (h * h), -2 / (h * h), 1 / (h * h)}};
  }
  if (p == 0) {
    if (order == 1) return {{0, 1, 2}, {-1.5 / h, 2.0 / h, -0.5 / h}};
    return {{0, 1, 2, 3}, {2 / (h * h), -5 / (h * h), 4 / (h * h), -1 / (h * h)}};
  }
  if (order == 1) return {{0, -1, -2}, {1.5 / h, -2.0 / h, 0.5 / h}};
  return {{0, -1, -2, -3}, {2 / (h * h), -5 / (h * h), 4 / (h * h), -1 / (h * h)}};
}

inline int wrap_index(int i, int N, bool periodic) {
  if (!periodic) {
    if (i < 0 || i >= N) throw DegenerateStencil("stencil leaves sampled region");
    return i;
  }
  return ((i % N) + N) % N;
}

}  // namespace detail

inline MetricJet explicit_jet(const ExplicitGrid& grid, const Chart& chart, const Vec& x) {
  const int n = grid.n();
  std::vector<int> base(n);
  Vec delta(n);
  for (int a = 0; a < n; ++a) {
    double s = (x[a] - grid.origin[a]) / grid.spacing;
    int p = static_cast<int>(std::lround(s));
    if (grid.periodic[a]) p = ((p % grid.dims[a]) + grid.dims[a]) % grid.dims[a];
    else {
      if (p < 0) p = 0;
      if (p > grid.dims[a] - 1) p = grid.dims[a] - 1;
    }
    base[a] = p;
    delta[a] = x[a] - (grid.origin[a] + p * grid.spacing);
    if (grid.periodic[a]) {
      double period = grid.dims[a] * grid.spacing;
      delta[a] -= period * std::round(delta[a] / period);
    }
  }

  MetricJet out;
  out.g = Mat::Zero(n, n);
  out.dg = Tensor3(n);
  out.d2g = Tensor4(n);

  auto sample = [&](const std::vector<int>& idx, int i, int j) {
    std::vector<int> w(n);
    for (int a = 0; a < n; ++a) w[a] = detail::wrap_index(idx[a], grid.dims[a], grid.periodic[a]);
    return grid.value(w, i, j);
  };

  // value, first and second derivatives at the base node
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = sample(base, i, j);
      Vec d1(n);
      Mat d2 = Mat::Zero(n, n);
      for (int a = 0; a < n; ++a) {
        auto s1 = detail::stencil_1d(base[a], grid.dims[a], grid.periodic[a], 1, grid.spacing);
        auto s2 = detail::stencil_1d(base[a], grid.dims[a], grid.periodic[a], 2, grid.spacing);
        double acc1 = 0, acc2 = 0;
        std::vector<int> idx = base;
        for (size_t k = 0; k < s1.offs.size(); ++k) {
          idx[a] = base[a] + s1.offs[k];
          acc1 += s1.coef[k] * sample(idx, i, j);
        }
        for (size_t k = 0; k < s2.offs.size(); ++k) {
          idx[a] = base[a] + s2.offs[k];
          acc2 += s2.coef[k] * sample(idx, i, j);
        }
        d1[a] = acc1;
        d2(a, a) = acc2;
      }
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          auto sa = detail::stencil_1d(base[a], grid.dims[a], grid.periodic[a], 1, grid.spacing);
          auto sb = detail::stencil_1d(base[b], grid.dims[b], grid.periodic[b], 1, grid.spacing);
          double acc = 0;
          std::vector<int> idx = base;
          for (size_t ka = 0; ka < sa.offs.size(); ++ka)
            for (size_t kb = 0; kb < sb.offs.size(); ++kb) {
              idx[a] = base[a] + sa.offs[ka];
              idx[b] = base[b] + sb.offs[kb];
              acc += sa.coef[ka] * sb.coef[kb] * sample(idx, i, j);
            }
          idx[a] = base[a];
          idx[b] = base[b];
          d2(a, b) = d2(b, a) = acc;
        }
      // Taylor-extend from the node to x (second order in the value,
      // first order in the gradient; Hessian frozen)
      double val = v + d1.dot(delta) + 0.5 * delta.dot(d2 * delta);
      Vec grad = d1 + d2 * delta;
      out.g(i, j) = out.g(j, i) = val;
      for (int a = 0; a < n; ++a) {
        out.dg(a, i, j) = grad[a];
        if (i != j) out.dg(a, j, i) = grad[a];
        for (int b = 0; b < n; ++b) {
          out.d2g(a, b, i, j) = d2(a, b);
          if (i != j) out.d2g(a, b, j, i) = d2(a, b);
        }
      }
    }
  (void)chart;
  return out;
}

inline MetricJet MetricField::jet_impl(const Vec& x) const {
  const int n = chart_.n;
  if (std::holds_alternative<Flat>(src_)) {
    MetricJet j;
    j.g = Mat::Identity(n, n);
    j.dg = Tensor3(n);
    j.d2g = Tensor4(n);
    return j;
  }
  if (auto* cf = std::get_if<ConformallyFlat>(&src_)) {
    ScalarJet h = cf->factor.jet(x);
    const double p = 4.0 / (n - 2);
    const double hp = std::pow(h.value, p);
    const double hp1 = p * std::pow(h.value, p - 1);
    const double hp2 = p * (p - 1) * std::pow(h.value, p - 2);
    MetricJet j;
    j.g = hp * Mat::Identity(n, n);
    j.dg = Tensor3(n);
    j.d2g = Tensor4(n);
    for (int k = 0; k < n; ++k) {
      double dk = hp1 * h.grad[k];
      for (int i = 0; i < n; ++i) j.dg(k, i, i) = dk;
      for (int l = 0; l < n; ++l) {
        double dkl = hp2 * h.grad[k] * h.grad[l] + hp1 * h.hess(k, l);
        for (int i = 0; i < n; ++i) j.d2g(k, l, i, i) = dkl;
      }
    }
    return j;
  }
  if (auto* ex = std::get_if<Explicit>(&src_)) return explicit_jet(*ex->grid, chart_, x);
  if (auto* pe = std::get_if<Perturbed>(&src_)) {
    MetricJet j = pe->base->jet(x);
    TensorJet tj = pe->direction(x);
    const double t = pe->t;
    j.g += t * tj.value;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
          j.dg(k, i, jj) += t * tj.d1(k, i, jj);
          for (int l = 0; l < n; ++l) j.d2g(k, l, i, jj) += t * tj.d2(k, l, i, jj);
        }
    return j;
  }
  if (auto* cfm = std::get_if<ClosedForm>(&src_)) return cfm->fn(x);
  throw PointOutsideChart("reduced metric has no Cartesian jet; use reduced_jet");
}

// Public operation: full metric jet with positive-definiteness check.
inline MetricJet metric_jet(const MetricField& field, const Vec& x) {
  return field.jet(x);
}

// Sample any Cartesian-chart metric onto an explicit grid (values only; the
// consumer differentiates with the grid stencils).
inline MetricField resample_explicit(const MetricField& src, const Vec& origin,
                                     double spacing, const std::vector<int>& dims) {
  const int n = src.dimension();
  ExplicitGrid grid;
  grid.origin = origin;
  grid.spacing = spacing;
  grid.dims = dims;
  grid.periodic.assign(n, false);
  if (src.chart().kind == ChartKind::TorusSlab)
    for (int a = 0; a < n - 1; ++a) grid.periodic[a] = true;
  grid.coeff.resize(grid.node_count() * (n * (n + 1) / 2));
  std::vector<int> idx(n, 0);
  bool done = false;
  while (!done) {
    Vec x = grid.node_point(idx);
    Mat g = src.jet(x).g;
    long f = grid.flat(idx) * (n * (n + 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) grid.coeff[f + tri_index(i, j, n)] = g(i, j);
    int a = n - 1;
    while (a >= 0 && ++idx[a] == grid.dims[a]) idx[a--] = 0;
    done = a < 0;
  }
  return MetricField::explicit_grid(src.chart(), std::move(grid));
}

// ---------------------------------------------------------------------------
// Columnar text format for explicit metric grids:
//   header: n chart spacing dims...
//   rows:   x1 ... xn g11 g12 ... gnn   (upper triangle)
// ---------------------------------------------------------------------------

inline void write_explicit_grid(const MetricField& field, std::ostream& os) {
  auto* ex = std::get_if<MetricField::Explicit>(&field.source());
  if (!ex) throw IoFailure("field is not an explicit grid");
  const ExplicitGrid& g = *ex->grid;
  const int n = g.n();
  os << n << ' '
     << (field.chart().kind == ChartKind::TorusSlab ? "torusslab" : "halfspace") << ' '
     << g.spacing;
  for (int d : g.dims) os << ' ' << d;
  os << '\n';
  os.precision(17);
  std::vector<int> idx(n, 0);
  bool done = false;
  while (!done) {
    Vec x = g.node_point(idx);
    for (int a = 0; a < n; ++a) os << x[a] << ' ';
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) os << g.value(idx, i, j) << (i == n - 1 && j == n - 1 ? '\n' : ' ');
    int a = n - 1;
    while (a >= 0 && ++idx[a] == g.dims[a]) idx[a--] = 0;
    done = a < 0;
  }
}

inline MetricField read_explicit_grid(std::istream& is) {
  int n;
  std::string chart_name;
  ExplicitGrid g;
  if (!(is >> n >> chart_name >> g.spacing)) throw IoFailure("bad explicit grid header");
  g.dims.resize(n);
  for (int a = 0; a < n; ++a)
    if (!(is >> g.dims[a])) throw IoFailure("bad explicit grid dims");
  Chart chart = chart_name == "torusslab" ? Chart::torus_slab(n) : Chart::half_space(n);
  g.periodic.assign(n, false);
  if (chart.kind == ChartKind::TorusSlab)
    for (int a = 0; a < n - 1; ++a) g.periodic[a] = true;
  g.coeff.resize(g.node_count() * (n * (n + 1) / 2));
  g.origin = Vec::Zero(n);
  std::vector<int> idx(n, 0);
  bool done = false, first = true;
  Vec x(n);
  while (!done) {
    for (int a = 0; a < n; ++a)
      if (!(is >> x[a])) throw IoFailure("truncated explicit grid row");
    if (first) {
      g.origin = x;
      first = false;
    }
    long f = g.flat(idx) * (n * (n + 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (!(is >> g.coeff[f + tri_index(i, j, n)]))
          throw IoFailure("truncated explicit grid row");
    int a = n - 1;
    while (a >= 0 && ++idx[a] == g.dims[a]) idx[a--] = 0;
    done = a < 0;
  }
  return MetricField::explicit_grid(chart, std::move(g));
}

}  // namespace lab

#endif  // LAB_METRIC_FIELD_HPP
