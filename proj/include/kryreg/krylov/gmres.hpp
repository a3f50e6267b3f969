#pragma once

#include "kryreg/error.hpp"
#include "kryreg/krylov/config.hpp"
#include "kryreg/krylov/givens.hpp"
#include "kryreg/krylov/operator.hpp"
#include "kryreg/krylov/trace.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace kryreg {

/// h_{j+1,j} below this fraction of the cycle's initial residual is a happy
/// breakdown.
inline constexpr double kHappyBreakdownRatio = 1e-14;
/// A second Gram-Schmidt pass runs when ||w|| shrinks below this fraction.
inline constexpr double kReorthogonalizeRatio = 0.7;

namespace detail {

// Restarted (F)GMRES. With Flexible = false the preconditioner is never
// called and Z aliases V, which is plain GMRES. Each cycle:
//   r0 = b - A x0, beta = ||r0||, v1 = r0 / beta
//   for j: z_j = M_j^{-1} v_j, w = A z_j, modified Gram-Schmidt against v_1..v_j,
//          h_{j+1,j} = ||w||, v_{j+1} = w / h_{j+1,j}
//   y = argmin ||beta e1 - H y||, x = x0 + Z y; restart from x if not converged.
template <bool Flexible, LinearOperator Op, Preconditioner P>
SolveResult arnoldi_solve(const Op& a, P& prec, const Vector& b, const SolverConfig& cfg,
                          std::optional<Vector> x0, const char* who) {
  cfg.validate();
  const Index n = a.size();
  if (b.size() != n) throw InvalidInput(std::string(who) + ": right-hand side length mismatch");
  if (!b.allFinite()) throw InvalidInput(std::string(who) + ": non-finite right-hand side");
  if (x0 && x0->size() != n) throw InvalidInput(std::string(who) + ": initial guess length mismatch");

  SolveResult res;
  ConvergenceTrace& trace = res.trace;
  TraceRecorder rec(trace);
  const Precision outer_precision = mvp_precision(a);

  res.x = x0 ? *x0 : Vector::Zero(n);
  Vector& x = res.x;
  Vector r = b;
  Vector w(n);
  if (!x.isZero(0.0)) {
    a.apply(x, w);
    rec.add_outer_mvp(outer_precision);
    r -= w;
  }
  const double scale = residual_scale(cfg.norm, n, b.norm());
  double beta = r.norm();
  rec.record(beta * scale);
  if (beta * scale <= cfg.tolerance || beta == 0.0) {
    rec.finish(Termination::Converged);
    return res;
  }

  const Index m = cfg.restart;
  std::vector<Vector> v;
  std::vector<Vector> z;
  std::vector<Vector> az;  // A z_j, kept only for the Arnoldi relation check
  Matrix h(m + 1, m);
  int steps = 0;

  const auto basis = [&](Index j) -> const Vector& {
    if constexpr (Flexible) return z[static_cast<std::size_t>(j)];
    else return v[static_cast<std::size_t>(j)];
  };

  for (;;) {
    v.clear();
    z.clear();
    az.clear();
    h.setZero();
    v.push_back(r / beta);
    GivensLeastSquares ls(beta, m);
    double h_fro2 = 0.0;
    double rel_fro2 = 0.0;
    bool converged = false;
    bool happy = false;
    if (cfg.check_arnoldi)
      trace.max_orthogonality_loss =
          std::max(trace.max_orthogonality_loss, std::abs(v[0].squaredNorm() - 1.0));

    Index k = 0;
    while (k < m && steps < cfg.max_iterations) {
      if constexpr (Flexible) {
        Vector zk(n);
        apply_preconditioner(prec, v[static_cast<std::size_t>(k)], zk, rec);
        if (zk.size() != n || !zk.allFinite())
          throw PreconditionerFailure(std::string(who) + ": preconditioner returned a non-finite vector");
        z.push_back(std::move(zk));
      }
      a.apply(basis(k), w);
      rec.add_outer_mvp(outer_precision);
      if (cfg.check_arnoldi) az.push_back(w);

      const double before = w.norm();
      for (Index i = 0; i <= k; ++i) {
        const double hik = w.dot(v[static_cast<std::size_t>(i)]);
        h(i, k) = hik;
        w.noalias() -= hik * v[static_cast<std::size_t>(i)];
      }
      double after = w.norm();
      if (after < kReorthogonalizeRatio * before) {
        for (Index i = 0; i <= k; ++i) {
          const double hik = w.dot(v[static_cast<std::size_t>(i)]);
          h(i, k) += hik;
          w.noalias() -= hik * v[static_cast<std::size_t>(i)];
        }
        after = w.norm();
      }
      h(k + 1, k) = after;
      const double rho = ls.push_column(h.col(k).head(k + 2));
      happy = after <= kHappyBreakdownRatio * beta;
      if (!happy) v.push_back(w / after);

      if (cfg.check_arnoldi) {
        if (!happy) {
          const Vector& vn = v.back();
          double loss = std::abs(vn.squaredNorm() - 1.0);
          for (Index i = 0; i <= k; ++i)
            loss = std::max(loss, std::abs(vn.dot(v[static_cast<std::size_t>(i)])));
          trace.max_orthogonality_loss = std::max(trace.max_orthogonality_loss, loss);
        }
        Vector col = az.back();
        for (Index i = 0; i <= k; ++i) col.noalias() -= h(i, k) * v[static_cast<std::size_t>(i)];
        if (!happy) col.noalias() -= h(k + 1, k) * v.back();
        rel_fro2 += col.squaredNorm();
        h_fro2 += h.col(k).head(k + 2).squaredNorm();
        if (h_fro2 > 0.0)
          trace.max_arnoldi_residual =
              std::max(trace.max_arnoldi_residual, std::sqrt(rel_fro2 / h_fro2));
      }

      ++k;
      ++steps;
      rec.record(rho * scale);
      if (cfg.on_iterate) {
        const Vector y = ls.solve();
        Vector xk = x;
        for (Index j = 0; j < k; ++j) xk.noalias() += y(j) * basis(j);
        cfg.on_iterate(steps, xk);
      }
      if (happy || rho * scale <= cfg.tolerance) {
        converged = true;
        break;
      }
    }

    if (k > 0) {
      const Vector y = ls.solve();
      for (Index j = 0; j < k; ++j) x.noalias() += y(j) * basis(j);
    }
    if (converged) {
      rec.finish(Termination::Converged, happy ? "happy breakdown" : "");
      return res;
    }
    if (steps >= cfg.max_iterations) {
      rec.finish(Termination::MaxIterations);
      return res;
    }

    a.apply(x, w);
    rec.add_outer_mvp(outer_precision);
    r = b - w;
    beta = r.norm();
    ++trace.restarts;
    if (!std::isfinite(beta))
      throw NumericalBreakdown(std::string(who) + ": residual diverged to non-finite value");
    if (beta * scale <= cfg.tolerance || beta == 0.0) {
      rec.finish(Termination::Converged);
      return res;
    }
  }
}

}  // namespace detail

/// Restarted GMRES(m).
template <LinearOperator Op>
SolveResult gmres(const Op& a, const Vector& b, const SolverConfig& cfg,
                  std::optional<Vector> x0 = std::nullopt) {
  IdentityPreconditioner unused;
  return detail::arnoldi_solve<false>(a, unused, b, cfg, std::move(x0), "gmres");
}

/// Flexible GMRES(m) with right preconditioning; the preconditioner may be
/// an inexact iterative solve that differs at every step.
template <LinearOperator Op, Preconditioner P>
SolveResult fgmres(const Op& a, P& prec, const Vector& b, const SolverConfig& cfg,
                   std::optional<Vector> x0 = std::nullopt) {
  return detail::arnoldi_solve<true>(a, prec, b, cfg, std::move(x0), "fgmres");
}

}  // namespace kryreg
