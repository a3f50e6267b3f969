#pragma once

// One entry point for solving (Khat + gamma I) x = b with any of the shipped
// solvers, shared by the regression layer and the benchmark harness.

#include "kryreg/dense.hpp"
#include "kryreg/error.hpp"
#include "kryreg/kernel.hpp"
#include "kryreg/krylov/cg.hpp"
#include "kryreg/krylov/config.hpp"
#include "kryreg/krylov/fcg.hpp"
#include "kryreg/krylov/gmres.hpp"
#include "kryreg/krylov/preconditioners.hpp"
#include "kryreg/krylov/trace.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kryreg {

enum class SolverKind { Direct, CG, GMRES, FGMRES, FCG, IluCG };

inline constexpr std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Direct: return "direct";
    case SolverKind::CG: return "cg";
    case SolverKind::GMRES: return "gmres";
    case SolverKind::FGMRES: return "fgmres";
    case SolverKind::FCG: return "fcg";
    case SolverKind::IluCG: return "ilu-cg";
  }
  return "unknown";
}

inline SolverKind parse_solver_kind(std::string_view s) {
  for (SolverKind k : {SolverKind::Direct, SolverKind::CG, SolverKind::GMRES, SolverKind::FGMRES,
                       SolverKind::FCG, SolverKind::IluCG})
    if (s == to_string(k)) return k;
  throw InvalidInput("unknown solver '" + std::string(s) + "'");
}

inline bool needs_dense(SolverKind k) { return k == SolverKind::Direct || k == SolverKind::IluCG; }

struct SolveOptions {
  SolverKind solver = SolverKind::FGMRES;
  SolverConfig config;
  /// For FGMRES/FCG. Unset means `rules` applied to the system's gamma.
  std::optional<PreconditionerConfig> preconditioner;
  PreconditionerRules rules;
  double ilu_threshold = 1e-2;
  Index dense_cap = kDefaultDenseCap;

  PreconditionerConfig effective_preconditioner(double gamma) const {
    return preconditioner ? *preconditioner
                          : rules.derive(gamma, config.tolerance);
  }
};

/// Explicit matrix of an operator's regularized kernel.
inline Matrix dense_matrix(const KernelOperator& op, Index dense_cap = kDefaultDenseCap) {
  KernelSpec spec = op.spec();
  spec.regularizer = op.diagonal_shift();
  return build_dense_kernel(Dataset(op.points()), spec, dense_cap);
}

/// Solves repeatedly against one kernel system. Direct and ILU-CG build the
/// dense matrix and their factor once, at construction; that cost is
/// reported by setup_ms().
class KernelSystemSolver {
 public:
  KernelSystemSolver(KernelOperator op, SolveOptions opts)
      : op_(std::move(op)), opts_(std::move(opts)) {
    opts_.config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    if (needs_dense(opts_.solver)) {
      dense_ = dense_matrix(op_, opts_.dense_cap);
      if (opts_.solver == SolverKind::Direct) {
        cholesky_.emplace(*dense_);
      } else {
        ilu_.emplace(ilu_factor(*dense_, opts_.ilu_threshold));
      }
    }
    setup_ms_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }

  const KernelOperator& op() const { return op_; }
  const SolveOptions& options() const { return opts_; }
  double setup_ms() const { return setup_ms_; }
  const std::optional<IluPreconditioner>& ilu() const { return ilu_; }

  SolveResult solve(const Vector& b, std::optional<Vector> x0 = std::nullopt) {
    switch (opts_.solver) {
      case SolverKind::Direct: return direct(b);
      case SolverKind::CG: return cg(op_, b, opts_.config, std::move(x0));
      case SolverKind::GMRES: return gmres(op_, b, opts_.config, std::move(x0));
      case SolverKind::FGMRES: {
        auto p = regularized_kernel_preconditioner(op_, opts_.effective_preconditioner(op_.spec().regularizer));
        return fgmres(op_, p, b, opts_.config, std::move(x0));
      }
      case SolverKind::FCG: {
        auto p = regularized_kernel_preconditioner(op_, opts_.effective_preconditioner(op_.spec().regularizer));
        return fcg(op_, p, b, opts_.config, std::move(x0));
      }
      case SolverKind::IluCG: return pcg(op_, *ilu_, b, opts_.config, std::move(x0));
    }
    throw InvalidInput("unknown solver");
  }

  /// Several right-hand sides; Direct solves them as one block. Per-column
  /// traces of iterative solves are appended to `traces` when given.
  Matrix solve_many(const Matrix& rhs, std::vector<ConvergenceTrace>* traces = nullptr) {
    if (opts_.solver == SolverKind::Direct) return cholesky_->solve(rhs);
    Matrix out(rhs.rows(), rhs.cols());
    for (Index j = 0; j < rhs.cols(); ++j) {
      SolveResult r = solve(rhs.col(j));
      out.col(j) = r.x;
      if (traces) traces->push_back(std::move(r.trace));
    }
    return out;
  }

 private:
  // The trace of a direct solve holds one record: the final residual.
  SolveResult direct(const Vector& b) {
    if (b.size() != op_.size()) throw InvalidInput("direct: right-hand side length mismatch");
    SolveResult res;
    detail::TraceRecorder rec(res.trace);
    res.x = cholesky_->solve(b);
    const Vector r = b - *dense_ * res.x;
    rec.record(residual_norm(opts_.config.norm, r, b));
    rec.finish(Termination::Converged);
    return res;
  }

  KernelOperator op_;
  SolveOptions opts_;
  std::optional<Matrix> dense_;
  std::optional<CholeskyFactor> cholesky_;
  std::optional<IluPreconditioner> ilu_;
  double setup_ms_ = 0.0;
};

}  // namespace kryreg
