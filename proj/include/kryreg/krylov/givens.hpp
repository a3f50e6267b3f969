#pragma once

#include "kryreg/error.hpp"
#include "kryreg/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace kryreg {

/// Progressive QR of an upper-Hessenberg (k+1) x k matrix by Givens
/// rotations, solving min_y ||beta e1 - H y||_2 one column at a time.
class GivensLeastSquares {
 public:
  GivensLeastSquares(double beta, Index max_columns)
      : r_(Matrix::Zero(max_columns + 1, max_columns)),
        g_(Vector::Zero(max_columns + 1)),
        cs_(static_cast<std::size_t>(max_columns)),
        sn_(static_cast<std::size_t>(max_columns)) {
    g_(0) = beta;
  }

  Index columns() const { return k_; }

  /// Appends column k of H (entries 0..k+1) and returns the current
  /// least-squares residual |g_{k+1}|.
  double push_column(const Eigen::Ref<const Vector>& h) {
    const Index k = k_;
    if (k >= r_.cols()) throw InvalidInput("GivensLeastSquares: capacity exceeded");
    if (h.size() < k + 2) throw InvalidInput("GivensLeastSquares: column too short");
    for (Index i = 0; i <= k + 1; ++i) r_(i, k) = h(i);
    for (Index i = 0; i < k; ++i) {
      const double c = cs_[static_cast<std::size_t>(i)];
      const double s = sn_[static_cast<std::size_t>(i)];
      const double t = c * r_(i, k) + s * r_(i + 1, k);
      r_(i + 1, k) = -s * r_(i, k) + c * r_(i + 1, k);
      r_(i, k) = t;
    }
    const double a = r_(k, k);
    const double b = r_(k + 1, k);
    const double rho = std::hypot(a, b);
    double c = 1.0;
    double s = 0.0;
    if (rho > 0.0) {
      c = a / rho;
      s = b / rho;
    }
    cs_[static_cast<std::size_t>(k)] = c;
    sn_[static_cast<std::size_t>(k)] = s;
    r_(k, k) = rho;
    r_(k + 1, k) = 0.0;
    g_(k + 1) = -s * g_(k);
    g_(k) = c * g_(k);
    ++k_;
    return std::abs(g_(k + 1));
  }

  double residual() const { return std::abs(g_(k_)); }

  /// Back substitution on the rotated triangle.
  Vector solve() const {
    Vector y(k_);
    for (Index i = k_ - 1; i >= 0; --i) {
      double s = g_(i);
      for (Index j = i + 1; j < k_; ++j) s -= r_(i, j) * y(j);
      if (r_(i, i) == 0.0)
        throw NumericalBreakdown("hessenberg least squares: singular triangle at " +
                                 std::to_string(i));
      y(i) = s / r_(i, i);
    }
    return y;
  }

 private:
  Matrix r_;
  Vector g_;
  std::vector<double> cs_, sn_;
  Index k_ = 0;
};

struct HessenbergSolution {
  Vector y;
  double residual_norm = 0.0;
};

/// min_y ||beta e1 - H y||_2 for a (k+1) x k upper-Hessenberg H.
inline HessenbergSolution hessenberg_lstsq(const Matrix& h, double beta) {
  const Index k = h.cols();
  if (h.rows() != k + 1) throw InvalidInput("hessenberg_lstsq: H must be (k+1) x k");
  for (Index j = 0; j < k; ++j)
    for (Index i = j + 2; i <= k; ++i)
      if (h(i, j) != 0.0) throw InvalidInput("hessenberg_lstsq: H is not upper Hessenberg");
  GivensLeastSquares ls(beta, k);
  for (Index j = 0; j < k; ++j) ls.push_column(h.col(j));
  return {ls.solve(), ls.residual()};
}

}  // namespace kryreg
