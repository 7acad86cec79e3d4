#ifndef LAB_CONFORMAL_FACTOR_HPP
#define LAB_CONFORMAL_FACTOR_HPP

#include <cmath>
#include <optional>
#include <utility>

#include "lab/common.hpp"
#include "lab/fields.hpp"

namespace lab {

// Conformal factor h(x) = 1 + C * m * |x|^(2-n) plus an optional correction
// decaying like |x|^(1-n).  C is fixed at 1/2 so that the calibrated mass of
// h^(4/(n-2)) * delta equals m (see data/mass_calibration.json).
class ConformalFactor {
 public:
  ConformalFactor(int n, double m, double C = 0.5) : n_(n), m_(m), C_(C) {}

  ConformalFactor with_correction(ScalarFieldFn corr) const {
    ConformalFactor f = *this;
    f.correction_ = std::move(corr);
    return f;
  }

  int dimension() const { return n_; }
  double mass_parameter() const { return m_; }
  double constant() const { return C_; }
  bool radial() const { return !correction_; }

  ScalarJet jet(const Vec& x) const {
    const double r2 = x.squaredNorm();
    if (r2 <= 0.0) throw PointOutsideChart("conformal factor singular at the origin");
    const double r = std::sqrt(r2);
    const double p = 2.0 - n_;
    const double rp = std::pow(r, p);
    ScalarJet j;
    j.value = 1.0 + C_ * m_ * rp;
    // d/dx_i r^p = p r^(p-2) x_i ; second derivative standard
    const double c1 = C_ * m_ * p * std::pow(r, p - 2.0);
    const double c2 = C_ * m_ * p * (p - 2.0) * std::pow(r, p - 4.0);
    j.grad = c1 * x;
    j.hess = c2 * x * x.transpose() + c1 * Mat::Identity(n_, n_);
    if (correction_) {
      ScalarJet c = (*correction_)(x);
      j.value += c.value;
      j.grad += c.grad;
      j.hess += c.hess;
    }
    if (j.value <= 0.0)
      throw NonPositiveConformalFactor("h <= 0 at queried point");
    return j;
  }

  double operator()(const Vec& x) const { return jet(x).value; }

 private:
  int n_;
  double m_;
  double C_;
  std::optional<ScalarFieldFn> correction_;
};

}  // namespace lab

#endif  // LAB_CONFORMAL_FACTOR_HPP
