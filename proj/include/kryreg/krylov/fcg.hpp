#pragma once

#include "kryreg/error.hpp"
#include "kryreg/krylov/config.hpp"
#include "kryreg/krylov/operator.hpp"
#include "kryreg/krylov/trace.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace kryreg {

/// Consecutive non-decreasing residuals that end a flexible CG run.
inline constexpr int kStagnationWindow = 3;

/// Flexible conjugate gradient. Every new search direction is explicitly
/// A-orthogonalized against all stored previous directions (full recurrence),
/// which keeps conjugacy when the preconditioner changes between steps. All
/// directions d_j and products A d_j are kept.
template <LinearOperator Op, Preconditioner P>
SolveResult fcg(const Op& a, P& prec, const Vector& b, const SolverConfig& cfg,
                std::optional<Vector> x0 = std::nullopt) {
  cfg.validate();
  const Index n = a.size();
  if (b.size() != n) throw InvalidInput("fcg: right-hand side length mismatch");
  if (!b.allFinite()) throw InvalidInput("fcg: non-finite right-hand side");
  if (x0 && x0->size() != n) throw InvalidInput("fcg: initial guess length mismatch");

  SolveResult res;
  detail::TraceRecorder rec(res.trace);
  const Precision outer_precision = mvp_precision(a);

  res.x = x0 ? *x0 : Vector::Zero(n);
  Vector r = b;
  Vector q(n);
  if (!res.x.isZero(0.0)) {
    a.apply(res.x, q);
    rec.add_outer_mvp(outer_precision);
    r -= q;
  }
  const double scale = detail::residual_scale(cfg.norm, n, b.norm());
  double rnorm = r.norm();
  rec.record(rnorm * scale);
  if (rnorm * scale <= cfg.tolerance || rnorm == 0.0) {
    rec.finish(Termination::Converged);
    return res;
  }

  std::vector<Vector> dirs;
  std::vector<Vector> adirs;
  std::vector<double> dad;
  std::vector<double> history{rnorm};
  Vector z(n);

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    detail::apply_preconditioner(prec, r, z, rec);
    if (!z.allFinite()) throw PreconditionerFailure("fcg: preconditioner returned a non-finite vector");
    Vector d = z;
    for (std::size_t j = 0; j < dirs.size(); ++j) d.noalias() -= (d.dot(adirs[j]) / dad[j]) * dirs[j];

    a.apply(d, q);
    rec.add_outer_mvp(outer_precision);
    const double dq = d.dot(q);
    if (!(dq > 0.0)) {
      rec.finish(Termination::Breakdown, "fcg: d^T A d <= 0 (indefinite operator)");
      return res;
    }
    const double alpha = d.dot(r) / dq;
    res.x.noalias() += alpha * d;
    r.noalias() -= alpha * q;
    rnorm = r.norm();
    if (!std::isfinite(rnorm)) throw NumericalBreakdown("fcg: residual diverged to non-finite value");
    rec.record(rnorm * scale);
    if (cfg.on_iterate) cfg.on_iterate(k, res.x);
    if (rnorm * scale <= cfg.tolerance) {
      rec.finish(Termination::Converged);
      return res;
    }

    history.push_back(rnorm);
    if (history.size() > kStagnationWindow) {
      bool stalled = true;
      for (std::size_t i = history.size() - kStagnationWindow; i < history.size(); ++i)
        stalled = stalled && history[i] >= history[i - 1];
      if (stalled) {
        rec.finish(Termination::Stagnation, "fcg: residual did not decrease for 3 iterations");
        return res;
      }
    }

    dirs.push_back(std::move(d));
    adirs.push_back(q);
    dad.push_back(dq);
  }
  rec.finish(Termination::MaxIterations);
  return res;
}

}  // namespace kryreg
