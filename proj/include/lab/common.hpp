#ifndef LAB_COMMON_HPP
#define LAB_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace lab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Error types. Every failure mode surfaces as a named exception so the
// experiment runner can capture it with context.
// ---------------------------------------------------------------------------

#define LAB_DEFINE_ERROR(Name)                                  \
  struct Name : std::runtime_error {                            \
    explicit Name(const std::string& what)                      \
        : std::runtime_error(std::string(#Name ": ") + what) {} \
  }

LAB_DEFINE_ERROR(PointOutsideChart);
LAB_DEFINE_ERROR(NonPositiveDefinite);
LAB_DEFINE_ERROR(NonPositiveConformalFactor);
LAB_DEFINE_ERROR(QuadratureNotConverged);
LAB_DEFINE_ERROR(ExtrapolationIllConditioned);
LAB_DEFINE_ERROR(RadiusOutsideAnnulus);
LAB_DEFINE_ERROR(DegenerateStencil);
LAB_DEFINE_ERROR(NewtonDiverged);
LAB_DEFINE_ERROR(MaxIterations);
LAB_DEFINE_ERROR(FitIllConditioned);
LAB_DEFINE_ERROR(NotMinimal);
LAB_DEFINE_ERROR(NonManifoldMesh);
LAB_DEFINE_ERROR(StepTooLargeForStencil);
LAB_DEFINE_ERROR(EigenNotConverged);
LAB_DEFINE_ERROR(InteriorSingular);
LAB_DEFINE_ERROR(BaseNotScalarFlat);
LAB_DEFINE_ERROR(EigenvalueNotPositive);
LAB_DEFINE_ERROR(SolveSingular);
LAB_DEFINE_ERROR(NonPositiveSolution);
LAB_DEFINE_ERROR(ConfigInvalid);
LAB_DEFINE_ERROR(IoFailure);

#undef LAB_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Small dense tensors (n <= 7, stack-friendly sizes).
// ---------------------------------------------------------------------------

class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), v_(static_cast<size_t>(n) * n * n, 0.0) {}
  double& operator()(int i, int j, int k) { return v_[(i * n_ + j) * n_ + k]; }
  double operator()(int i, int j, int k) const { return v_[(i * n_ + j) * n_ + k]; }
  int dim() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> v_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), v_(static_cast<size_t>(n) * n * n * n, 0.0) {}
  double& operator()(int i, int j, int k, int l) {
    return v_[((i * n_ + j) * n_ + k) * n_ + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return v_[((i * n_ + j) * n_ + k) * n_ + l];
  }
  int dim() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Dimension-dependent constants.
// ---------------------------------------------------------------------------

// |S^(n-1)|, area of the unit sphere in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// c_n = (n-2) / (4(n-1)), the conformal Laplacian coupling constant.
inline double conformal_coupling(int n) {
  return (n - 2) / (4.0 * (n - 1));
}

inline double sq(double x) { return x * x; }

}  // namespace lab

#endif  // LAB_COMMON_HPP
