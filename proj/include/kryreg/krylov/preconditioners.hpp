#pragma once

#include "kryreg/dense.hpp"
#include "kryreg/error.hpp"
#include "kryreg/kernel.hpp"
#include "kryreg/krylov/cg.hpp"
#include "kryreg/krylov/config.hpp"
#include "kryreg/krylov/operator.hpp"

#include <sstream>
#include <string>
#include <utility>

namespace kryreg {

/// Approximates M^{-1} v by CG on M, started from zero and stopped at
/// ||M z - v|| <= inner_tolerance ||v|| or at the iteration cap. Hitting the
/// cap is not an error: the last iterate is returned and the application is
/// counted as capped.
template <LinearOperator Op>
class InnerCgPreconditioner {
 public:
  InnerCgPreconditioner(Op m, PreconditionerConfig cfg, std::string label = "inner-cg")
      : m_(std::move(m)), cfg_(cfg), label_(std::move(label)) {
    cfg_.validate();
    inner_.tolerance = cfg_.inner_tolerance;
    inner_.norm = ResidualNorm::TwoNorm;
    inner_.max_iterations = cfg_.max_inner_iterations > 0 ? cfg_.max_inner_iterations
                                                          : static_cast<int>(m_.size());
  }

  void apply(const Vector& v, Vector& z) {
    ++stats_.applications;
    if (v.isZero(0.0)) {
      z = Vector::Zero(v.size());
      return;
    }
    SolveResult inner;
    try {
      inner = cg(m_, v, inner_);
    } catch (const NumericalBreakdown& e) {
      throw PreconditionerFailure(std::string("inner CG failed: ") + e.what());
    }
    const ConvergenceTrace& t = inner.trace;
    stats_.inner_iterations += static_cast<std::uint64_t>(t.iterations());
    stats_.full_mvps += t.full_mvps();
    stats_.reduced_mvps += t.reduced_mvps();
    if (t.termination == Termination::MaxIterations) ++stats_.capped;
    z = std::move(inner.x);
  }

  PreconditionerStats stats() const { return stats_; }
  const PreconditionerConfig& config() const { return cfg_; }
  const Op& matrix() const { return m_; }
  int max_inner_iterations() const { return inner_.max_iterations; }

  std::string description() const {
    std::ostringstream s;
    s << label_ << "(delta=" << cfg_.delta << ", eps=" << cfg_.inner_tolerance
      << ", max_inner=" << inner_.max_iterations << ", precision=" << to_string(cfg_.inner_precision)
      << ")";
    return s.str();
  }

 private:
  Op m_;
  PreconditionerConfig cfg_;
  std::string label_;
  SolverConfig inner_;
  PreconditionerStats stats_;
};

/// The regularized-kernel preconditioner M = K + delta I = Khat + (gamma + delta) I,
/// applied by inner CG that uses the same matrix-free product as K, in the
/// configured inner precision.
inline InnerCgPreconditioner<KernelOperator> regularized_kernel_preconditioner(
    const KernelOperator& op, const PreconditionerConfig& cfg) {
  cfg.validate();
  return InnerCgPreconditioner<KernelOperator>(
      op.with_extra_shift(cfg.delta).with_precision(cfg.inner_precision), cfg,
      "regularized-kernel");
}

/// Exact M^{-1} by a dense Cholesky factor.
class DenseCholeskyPreconditioner {
 public:
  explicit DenseCholeskyPreconditioner(const Matrix& m) : factor_(m) {}

  void apply(const Vector& v, Vector& z) {
    ++stats_.applications;
    z = factor_.solve(v);
  }
  PreconditionerStats stats() const { return stats_; }
  std::string description() const { return "dense-cholesky"; }

 private:
  CholeskyFactor factor_;
  PreconditionerStats stats_;
};

/// Thresholded ILU(0) applied by two triangular solves.
class IluPreconditioner {
 public:
  explicit IluPreconditioner(IncompleteFactor f) : f_(std::move(f)) {}

  void apply(const Vector& v, Vector& z) {
    ++stats_.applications;
    z = ilu_apply(f_, v);
  }
  PreconditionerStats stats() const { return stats_; }
  const IncompleteFactor& factor() const { return f_; }
  std::string description() const {
    std::ostringstream s;
    s << "ilu0(tau=" << f_.drop_threshold << (f_.perturbed ? ", perturbed" : "") << ")";
    return s.str();
  }

 private:
  IncompleteFactor f_;
  PreconditionerStats stats_;
};

}  // namespace kryreg
