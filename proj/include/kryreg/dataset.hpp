#pragma once

#include "kryreg/error.hpp"
#include "kryreg/types.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace kryreg {

/// N points in R^d stored column-wise (one column per point), with optional
/// scalar targets. Duplicate points are allowed: they make the raw kernel
/// matrix singular, but the regularized matrix stays positive definite for
/// any positive regularizer.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(Matrix points, std::optional<Vector> targets = std::nullopt)
      : points_(std::move(points)), targets_(std::move(targets)) {
    if (points_.cols() > 0 && points_.rows() < 1)
      throw InvalidInput("Dataset: points must have dimension d >= 1");
    if (!points_.allFinite())
      throw InvalidInput("Dataset: non-finite coordinate");
    if (targets_) {
      if (targets_->size() != points_.cols())
        throw InvalidInput("Dataset: target count " + std::to_string(targets_->size()) +
                           " does not match point count " + std::to_string(points_.cols()));
      if (!targets_->allFinite()) throw InvalidInput("Dataset: non-finite target");
    }
  }

  Index n() const { return points_.cols(); }
  Index d() const { return points_.rows(); }
  bool empty() const { return n() == 0; }

  const Matrix& points() const { return points_; }
  auto point(Index i) const { return points_.col(i); }

  bool has_targets() const { return targets_.has_value(); }
  const Vector& targets() const {
    if (!targets_) throw InvalidInput("Dataset: no targets");
    return *targets_;
  }

  Dataset with_targets(Vector y) const { return Dataset(points_, std::move(y)); }
  Dataset without_targets() const { return Dataset(points_); }

  /// Rows selected by `indices`, in the given order.
  Dataset subset(std::span<const Index> indices) const {
    Matrix p(d(), static_cast<Index>(indices.size()));
    std::optional<Vector> y;
    if (targets_) y = Vector(p.cols());
    for (Index k = 0; k < p.cols(); ++k) {
      const Index i = indices[static_cast<std::size_t>(k)];
      if (i < 0 || i >= n()) throw InvalidInput("Dataset::subset: index out of range");
      p.col(k) = points_.col(i);
      if (y) (*y)(k) = (*targets_)(i);
    }
    return Dataset(std::move(p), std::move(y));
  }

 private:
  Matrix points_;
  std::optional<Vector> targets_;
};

}  // namespace kryreg
