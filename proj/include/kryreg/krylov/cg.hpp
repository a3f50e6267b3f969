#pragma once

#include "kryreg/error.hpp"
#include "kryreg/krylov/config.hpp"
#include "kryreg/krylov/operator.hpp"
#include "kryreg/krylov/trace.hpp"

#include <cmath>
#include <optional>

namespace kryreg {

/// Preconditioned conjugate gradient for SPD A and a fixed SPD
/// preconditioner. One product with A per iteration.
template <LinearOperator Op, Preconditioner P>
SolveResult pcg(const Op& a, P& prec, const Vector& b, const SolverConfig& cfg,
                std::optional<Vector> x0 = std::nullopt) {
  cfg.validate();
  const Index n = a.size();
  if (b.size() != n) throw InvalidInput("cg: right-hand side length mismatch");
  if (!b.allFinite()) throw InvalidInput("cg: non-finite right-hand side");

  SolveResult res;
  detail::TraceRecorder rec(res.trace);
  const Precision outer_precision = mvp_precision(a);

  Vector r = b;
  Vector q(n);
  if (x0 && x0->size() != n) throw InvalidInput("cg: initial guess length mismatch");
  res.x = x0 ? *x0 : Vector::Zero(n);
  if (x0 && !res.x.isZero(0.0)) {
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

  Vector z(n);
  detail::apply_preconditioner(prec, r, z, rec);
  Vector p = z;
  double rz = r.dot(z);

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    a.apply(p, q);
    rec.add_outer_mvp(outer_precision);
    const double pap = p.dot(q);
    if (!(pap > 0.0)) {
      rec.finish(Termination::Breakdown, "cg: p^T A p <= 0 (indefinite operator)");
      return res;
    }
    const double alpha = rz / pap;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    rnorm = r.norm();
    if (!std::isfinite(rnorm)) throw NumericalBreakdown("cg: residual diverged to non-finite value");
    rec.record(rnorm * scale);
    if (cfg.on_iterate) cfg.on_iterate(k, res.x);
    if (rnorm * scale <= cfg.tolerance) {
      rec.finish(Termination::Converged);
      return res;
    }
    detail::apply_preconditioner(prec, r, z, rec);
    const double rz_next = r.dot(z);
    if (!(rz_next > 0.0)) {
      rec.finish(Termination::Breakdown, "cg: r^T M^{-1} r <= 0 (preconditioner not SPD)");
      return res;
    }
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  rec.finish(Termination::MaxIterations);
  return res;
}

/// Unpreconditioned conjugate gradient.
template <LinearOperator Op>
SolveResult cg(const Op& a, const Vector& b, const SolverConfig& cfg,
               std::optional<Vector> x0 = std::nullopt) {
  IdentityPreconditioner id;
  return pcg(a, id, b, cfg, std::move(x0));
}

}  // namespace kryreg
