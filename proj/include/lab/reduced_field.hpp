#ifndef LAB_REDUCED_FIELD_HPP
#define LAB_REDUCED_FIELD_HPP

#include <utility>
#include <vector>

#include "lab/chart.hpp"
#include "lab/common.hpp"

namespace lab {

// 2-jet of a scalar sampled on an AnnulusGrid, in (xi, theta) coordinates.
struct GridJet {
  double v = 0, vx = 0, vt = 0, vxx = 0, vxt = 0, vtt = 0;
};

// Scalar samples on an AnnulusGrid with second-order finite-difference jets.
// Stencils are central where possible and second-order one-sided at edges.
// For d >= 3 the theta = 0 axis is a chart-interior symmetry line: ghost
// values are the reflected samples times `parity` (-1 for components that
// flip sign under theta -> -theta, such as mixed xi-theta tensor entries).
class ReducedField {
 public:
  ReducedField() = default;
  ReducedField(const AnnulusGrid& g, double fill = 0.0, int parity = +1)
      : grid_(g), parity_(parity), v_(g.nodes(), fill) {}

  const AnnulusGrid& grid() const { return grid_; }
  double& at(int i, int j) { return v_[grid_.id(i, j)]; }
  double at(int i, int j) const { return v_[grid_.id(i, j)]; }
  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }
  int parity() const { return parity_; }

  // Sample with axis reflection on the theta index; xi index must be valid.
  double sample(int i, int j) const {
    if (j < 0) {
      if (grid_.d >= 3) return parity_ * at(i, -1 - j);
      throw DegenerateStencil("theta index below grid");
    }
    if (j > grid_.n_th) throw DegenerateStencil("theta index above grid");
    return at(i, j);
  }

  GridJet jet(int i, int j) const {
    GridJet out;
    out.v = at(i, j);
    out.vx = d_nonperiodic_xi(i, j, 1);
    out.vxx = d_nonperiodic_xi(i, j, 2);

    auto val = [&](int jj) { return sample(i, jj); };
    std::pair<double, double> dt = d_theta(val, j);
    out.vt = dt.first;
    out.vtt = dt.second;

    // mixed term: theta-derivative of the xi-derivative field, which has the
    // same reflection parity as the field itself
    auto dxv = [&](int jj) {
      if (jj < 0) {
        if (grid_.d >= 3) return parity_ * d_nonperiodic_xi(i, -1 - jj, 1);
        throw DegenerateStencil("theta index below grid");
      }
      return d_nonperiodic_xi(i, jj, 1);
    };
    out.vxt = d_theta(dxv, j).first;
    return out;
  }

 private:
  template <class F>
  std::pair<double, double> d_theta(F&& val, int j) const {
    const double h = grid_.dth();
    const int N = grid_.n_th;
    const bool axis = grid_.d >= 3;  // reflection available below j = 0
    double d1, d2;
    if ((j >= 1 || axis) && j <= N - 1) {
      d1 = (val(j + 1) - val(j - 1)) / (2 * h);
      d2 = (val(j + 1) - 2 * val(j) + val(j - 1)) / (h * h);
    } else if (j == 0) {
      d1 = (-1.5 * val(0) + 2.0 * val(1) - 0.5 * val(2)) / h;
      d2 = (2.0 * val(0) - 5.0 * val(1) + 4.0 * val(2) - val(3)) / (h * h);
    } else {  // j == N
      d1 = (1.5 * val(N) - 2.0 * val(N - 1) + 0.5 * val(N - 2)) / h;
      d2 = (2.0 * val(N) - 5.0 * val(N - 1) + 4.0 * val(N - 2) - val(N - 3)) / (h * h);
    }
    return {d1, d2};
  }

  double d_nonperiodic_xi(int i, int j, int order) const {
    const double h = grid_.dxi();
    const int N = grid_.n_xi;
    auto val = [&](int ii) { return at(ii, j); };
    if (i >= 1 && i <= N - 1) {
      if (order == 1) return (val(i + 1) - val(i - 1)) / (2 * h);
      return (val(i + 1) - 2 * val(i) + val(i - 1)) / (h * h);
    }
    if (i == 0) {
      if (order == 1) return (-1.5 * val(0) + 2.0 * val(1) - 0.5 * val(2)) / h;
      return (2.0 * val(0) - 5.0 * val(1) + 4.0 * val(2) - val(3)) / (h * h);
    }
    if (order == 1) return (1.5 * val(N) - 2.0 * val(N - 1) + 0.5 * val(N - 2)) / h;
    return (2.0 * val(N) - 5.0 * val(N - 1) + 4.0 * val(N - 2) - val(N - 3)) / (h * h);
  }

  AnnulusGrid grid_;
  int parity_ = +1;
  std::vector<double> v_;
};

}  // namespace lab

#endif  // LAB_REDUCED_FIELD_HPP
