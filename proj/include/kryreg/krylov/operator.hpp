#pragma once

#include "kryreg/types.hpp"

#include <concepts>
#include <cstdint>
#include <string>

namespace kryreg {

/// Anything that can form y = A x for vectors of length size().
template <class Op>
concept LinearOperator = requires(const Op& op, const Vector& x, Vector& y) {
  { op.size() } -> std::convertible_to<Index>;
  op.apply(x, y);
};

/// Precision of the products an operator performs; Full unless it says otherwise.
template <class Op>
Precision mvp_precision(const Op& op) {
  if constexpr (requires { { op.precision() } -> std::convertible_to<Precision>; })
    return op.precision();
  else
    return Precision::Full;
}

/// Cumulative work done by a preconditioner since construction.
struct PreconditionerStats {
  std::uint64_t applications = 0;
  std::uint64_t inner_iterations = 0;
  std::uint64_t full_mvps = 0;
  std::uint64_t reduced_mvps = 0;
  /// Applications whose inner solve stopped at the iteration cap.
  std::uint64_t capped = 0;
};

/// A routine returning z with M z ~= v. It may change between calls, which
/// is what the flexible solvers allow for.
template <class P>
concept Preconditioner = requires(P& p, const Vector& v, Vector& z) {
  p.apply(v, z);
  { p.stats() } -> std::convertible_to<PreconditionerStats>;
  { p.description() } -> std::convertible_to<std::string>;
};

class IdentityPreconditioner {
 public:
  void apply(const Vector& v, Vector& z) {
    z = v;
    ++stats_.applications;
  }
  PreconditionerStats stats() const { return stats_; }
  std::string description() const { return "identity"; }

 private:
  PreconditionerStats stats_;
};

namespace detail {

/// Applies P and folds the work it did into the outer trace.
template <Preconditioner P, class Recorder>
void apply_preconditioner(P& prec, const Vector& v, Vector& z, Recorder& rec) {
  const PreconditionerStats before = prec.stats();
  prec.apply(v, z);
  const PreconditionerStats after = prec.stats();
  rec.add_inner(after.inner_iterations - before.inner_iterations,
                after.full_mvps - before.full_mvps, after.reduced_mvps - before.reduced_mvps,
                after.capped - before.capped);
}

}  // namespace detail

}  // namespace kryreg
