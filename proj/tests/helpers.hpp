#ifndef LAB_TESTS_HELPERS_HPP
#define LAB_TESTS_HELPERS_HPP

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lab/fields.hpp"
#include "lab/metric_field.hpp"

namespace lab::testing {

// Scalar field with finite-difference jet, for test inputs where the
// analytic derivatives are not worth writing out.  Step balanced for
// ~1e-8 gradient / ~1e-6 Hessian accuracy.
inline ScalarFieldFn fd_scalar(std::function<double(const Vec&)> f, int n,
                               double h = 1e-4) {
  return [=](const Vec& x) -> ScalarJet {
    ScalarJet j;
    j.value = f(x);
    j.grad = Vec::Zero(n);
    j.hess = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      j.grad[i] = (f(xp) - f(xm)) / (2 * h);
      j.hess(i, i) = (f(xp) - 2 * j.value + f(xm)) / (h * h);
    }
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        Vec a = x, b = x, c = x, d = x;
        a[i] += h; a[k] += h;
        b[i] += h; b[k] -= h;
        c[i] -= h; c[k] += h;
        d[i] -= h; d[k] -= h;
        j.hess(i, k) = j.hess(k, i) = (f(a) - f(b) - f(c) + f(d)) / (4 * h * h);
      }
    return j;
  };
}

// Random positive quadratic polynomial with exact jet.
inline ScalarFieldFn random_positive_poly(int n, unsigned seed, double amp = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec b(n);
  Mat Q(n, n);
  for (int i = 0; i < n; ++i) b[i] = amp * U(rng);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) Q(i, j) = Q(j, i) = amp * U(rng);
  return [=](const Vec& x) -> ScalarJet {
    ScalarJet j;
    j.value = 1.0 + b.dot(x) + x.dot(Q * x);
    j.grad = b + 2.0 * Q * x;
    j.hess = 2.0 * Q;
    return j;
  };
}

// Smooth random symmetric 2-tensor field built from separable trig waves,
// with exact jets.  Periodic with period 1 in every coordinate.
inline TensorFieldFn random_trig_tensor(int n, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> K(1, 2);
  struct Wave {
    int i, j;
    double a;
    Vec k;
    double phase;
  };
  auto waves = std::make_shared<std::vector<Wave>>();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Wave w;
      w.i = i;
      w.j = j;
      w.a = amp * U(rng);
      w.k = Vec(n);
      for (int d = 0; d < n; ++d) w.k[d] = 2.0 * std::numbers::pi * K(rng);
      w.phase = U(rng);
      waves->push_back(w);
    }
  return [n, waves](const Vec& x) -> TensorJet {
    TensorJet t;
    t.value = Mat::Zero(n, n);
    t.d1 = Tensor3(n);
    t.d2 = Tensor4(n);
    for (const auto& w : *waves) {
      double ar = w.k.dot(x) + w.phase;
      double v = w.a * std::cos(ar);
      double dv = -w.a * std::sin(ar);
      double ddv = -w.a * std::cos(ar);
      t.value(w.i, w.j) += v;
      if (w.i != w.j) t.value(w.j, w.i) += v;
      for (int a = 0; a < n; ++a) {
        t.d1(a, w.i, w.j) += dv * w.k[a];
        if (w.i != w.j) t.d1(a, w.j, w.i) += dv * w.k[a];
        for (int b = 0; b < n; ++b) {
          t.d2(a, b, w.i, w.j) += ddv * w.k[a] * w.k[b];
          if (w.i != w.j) t.d2(a, b, w.j, w.i) += ddv * w.k[a] * w.k[b];
        }
      }
    }
    return t;
  };
}

// Closed-form metric from a value-only lambda, derivatives by central
// differences (adequate when only first derivatives enter the consumer).
inline MetricFn fd_metric(std::function<Mat(const Vec&)> gfun, int n, double h = 1e-5) {
  return [=](const Vec& x) -> MetricJet {
    MetricJet j;
    j.g = gfun(x);
    j.dg = Tensor3(n);
    j.d2g = Tensor4(n);
    std::vector<Mat> d1(n);
    for (int a = 0; a < n; ++a) {
      Vec xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      Mat gp = gfun(xp), gm = gfun(xm);
      d1[a] = (gp - gm) / (2 * h);
      Mat dd = (gp - 2 * j.g + gm) / (h * h);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          j.dg(a, i, k) = d1[a](i, k);
          j.d2g(a, a, i, k) = dd(i, k);
        }
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[a] += h; xpp[b] += h;
        xpm[a] += h; xpm[b] -= h;
        xmp[a] -= h; xmp[b] += h;
        xmm[a] -= h; xmm[b] -= h;
        Mat dd = (gfun(xpp) - gfun(xpm) - gfun(xmp) + gfun(xmm)) / (4 * h * h);
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) {
            j.d2g(a, b, i, k) = dd(i, k);
            j.d2g(b, a, i, k) = dd(i, k);
          }
      }
    return j;
  };
}

}  // namespace lab::testing

#endif  // LAB_TESTS_HELPERS_HPP
