#pragma once

// Explicit-matrix baselines: direct Cholesky and a thresholded ILU(0).

#include "kryreg/error.hpp"
#include "kryreg/types.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace kryreg {

/// Wraps an explicit matrix as a linear operator.
class DenseOperator {
 public:
  explicit DenseOperator(Matrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw InvalidInput("DenseOperator: matrix must be square");
  }

  Index size() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }

  void apply(const Vector& x, Vector& y) const {
    if (x.size() != size()) throw InvalidInput("DenseOperator: length mismatch");
    y.noalias() = a_ * x;
    ++mvps_;
  }
  Vector apply(const Vector& x) const {
    Vector y;
    apply(x, y);
    return y;
  }
  std::uint64_t mvps() const { return mvps_; }

 private:
  Matrix a_;
  mutable std::uint64_t mvps_ = 0;
};

namespace detail {

inline void require_symmetric(const Matrix& k, const char* who) {
  if (k.rows() != k.cols()) throw InvalidInput(std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidInput(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

/// K = L L^T.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& k) {
    detail::require_symmetric(k, "cholesky");
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) {
      // Eigen stops at the first non-positive pivot; locate it for the report.
      const Matrix l = llt_.matrixLLT();
      Index pivot = 0;
      while (pivot < l.rows() && l(pivot, pivot) > 0.0 && std::isfinite(l(pivot, pivot))) ++pivot;
      throw NotPositiveDefinite(
          "cholesky: non-positive pivot at " + std::to_string(pivot) +
              " (regularizer too small or duplicate points with zero regularizer?)",
          pivot);
    }
  }

  Index size() const { return llt_.rows(); }
  Matrix lower() const { return llt_.matrixL(); }

  Matrix solve(const Matrix& b) const {
    if (b.rows() != size()) throw InvalidInput("cholesky_solve: right-hand side row mismatch");
    return llt_.solve(b);
  }
  Vector solve(const Vector& b) const {
    if (b.size() != size()) throw InvalidInput("cholesky_solve: right-hand side length mismatch");
    return llt_.solve(b);
  }

  double log_determinant() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  }

 private:
  Eigen::LLT<Matrix> llt_;
};

inline Matrix cholesky_solve(const Matrix& k, const Matrix& b) { return CholeskyFactor(k).solve(b); }
inline Vector cholesky_solve(const Matrix& k, const Vector& b) { return CholeskyFactor(k).solve(b); }

/// ILU(0) of a threshold-sparsified matrix. L is unit lower triangular and
/// stored without its diagonal; U carries the pivots. Both use the sparsity
/// pattern of the thresholded matrix, with no fill-in.
struct IncompleteFactor {
  Index n = 0;
  double drop_threshold = 0.0;
  /// A zero pivot was replaced by drop_threshold * max|k_ij|.
  bool perturbed = false;
  std::vector<Index> perturbed_rows;

  std::vector<Index> l_ptr, l_col;
  std::vector<double> l_val;
  std::vector<Index> u_ptr, u_col;  // first entry of each U row is the diagonal
  std::vector<double> u_val;

  /// Off-diagonal entries kept after thresholding (both triangles).
  Index retained_offdiagonals() const {
    return static_cast<Index>(l_col.size() + u_col.size()) - n;
  }
  bool is_diagonal() const { return retained_offdiagonals() == 0; }
};

inline IncompleteFactor ilu_factor(const Matrix& k, double drop_threshold) {
  if (!(drop_threshold >= 0.0)) throw InvalidInput("ilu_factor: drop threshold must be >= 0");
  if (k.rows() != k.cols()) throw InvalidInput("ilu_factor: matrix must be square");
  const Index n = k.rows();
  const double max_abs = n > 0 ? k.cwiseAbs().maxCoeff() : 0.0;
  const double cut = drop_threshold * max_abs;

  // Row-major working copy; dropped entries are zeroed and masked out.
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMatrix a = k;
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(n * n), 0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const bool kept = i == j || std::abs(a(i, j)) >= cut;
      keep[static_cast<std::size_t>(i * n + j)] = kept;
      if (!kept) a(i, j) = 0.0;
    }
  }

  IncompleteFactor f;
  f.n = n;
  f.drop_threshold = drop_threshold;
  f.l_ptr.assign(1, 0);
  f.u_ptr.assign(1, 0);

  for (Index i = 0; i < n; ++i) {
    const std::uint8_t* mask = keep.data() + i * n;
    double* row = a.row(i).data();
    for (Index k2 = 0; k2 < i; ++k2) {
      if (!mask[k2]) continue;
      const double lik = row[k2] / f.u_val[static_cast<std::size_t>(f.u_ptr[k2])];
      row[k2] = lik;
      // Only U entries of row k2 that also lie in row i's pattern are updated.
      for (Index p = f.u_ptr[k2] + 1; p < f.u_ptr[k2 + 1]; ++p) {
        const Index j = f.u_col[static_cast<std::size_t>(p)];
        if (mask[j]) row[j] -= lik * f.u_val[static_cast<std::size_t>(p)];
      }
    }
    double pivot = row[i];
    if (!(std::abs(pivot) > 1e-15 * max_abs) || !std::isfinite(pivot)) {
      if (!(cut > 0.0) || !std::isfinite(pivot))
        throw FactorizationBreakdown("ilu_factor: zero pivot at row " + std::to_string(i), i);
      pivot = cut;
      f.perturbed = true;
      f.perturbed_rows.push_back(i);
    }
    for (Index j = 0; j < i; ++j) {
      if (!mask[j]) continue;
      f.l_col.push_back(j);
      f.l_val.push_back(row[j]);
    }
    f.l_ptr.push_back(static_cast<Index>(f.l_col.size()));
    f.u_col.push_back(i);
    f.u_val.push_back(pivot);
    for (Index j = i + 1; j < n; ++j) {
      if (!mask[j]) continue;
      f.u_col.push_back(j);
      f.u_val.push_back(row[j]);
    }
    f.u_ptr.push_back(static_cast<Index>(f.u_col.size()));
  }
  return f;
}

/// U^{-1} L^{-1} v.
inline Vector ilu_apply(const IncompleteFactor& f, const Vector& v) {
  if (v.size() != f.n) throw InvalidInput("ilu_apply: length mismatch");
  Vector z = v;
  for (Index i = 0; i < f.n; ++i) {
    double s = z(i);
    for (Index p = f.l_ptr[i]; p < f.l_ptr[i + 1]; ++p)
      s -= f.l_val[static_cast<std::size_t>(p)] * z(f.l_col[static_cast<std::size_t>(p)]);
    z(i) = s;
  }
  for (Index i = f.n - 1; i >= 0; --i) {
    const Index p0 = f.u_ptr[i];
    double s = z(i);
    for (Index p = p0 + 1; p < f.u_ptr[i + 1]; ++p)
      s -= f.u_val[static_cast<std::size_t>(p)] * z(f.u_col[static_cast<std::size_t>(p)]);
    z(i) = s / f.u_val[static_cast<std::size_t>(p0)];
  }
  return z;
}

}  // namespace kryreg
