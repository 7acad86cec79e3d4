#ifndef LAB_FIELDS_HPP
#define LAB_FIELDS_HPP

#include <functional>

#include "lab/common.hpp"

namespace lab {

// 2-jet of a scalar field (enough for every curvature formula we evaluate).
struct ScalarJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

using ScalarFieldFn = std::function<ScalarJet(const Vec&)>;

// 2-jet of a symmetric 2-tensor field (perturbation directions).
struct TensorJet {
  Mat value;
  Tensor3 d1;   // d1(k,i,j) = d_k gamma_ij
  Tensor4 d2;   // d2(k,l,i,j) = d_k d_l gamma_ij
};

using TensorFieldFn = std::function<TensorJet(const Vec&)>;

inline ScalarJet constant_jet(int n, double c) {
  return {c, Vec::Zero(n), Mat::Zero(n, n)};
}

// Scalar field from value/grad/hess lambdas; convenience for tests and CLI.
template <class F, class G, class H>
ScalarFieldFn make_scalar_field(F value, G grad, H hess) {
  return [=](const Vec& x) -> ScalarJet { return {value(x), grad(x), hess(x)}; };
}

}  // namespace lab

#endif  // LAB_FIELDS_HPP
