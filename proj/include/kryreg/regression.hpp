#pragma once

// Gaussian process regression and simple kriging on top of the kernel
// system solvers. The GP prior has zero mean.

#include "kryreg/dataset.hpp"
#include "kryreg/dense.hpp"
#include "kryreg/error.hpp"
#include "kryreg/kernel.hpp"
#include "kryreg/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kryreg {

/// The solver did not meet its stopping rule; carries the trace.
class FitError : public Error {
 public:
  FitError(const std::string& what, ConvergenceTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const ConvergenceTrace& trace() const noexcept { return trace_; }

 private:
  ConvergenceTrace trace_;
};

struct FitOptions {
  SolveOptions solve;
  /// Subtract the target mean before solving and add it back to predictions.
  bool center_targets = false;
};

struct RegressionModel {
  Dataset train;
  KernelSpec spec;
  /// alpha solving (Khat + gamma I) alpha = y.
  Vector weights;
  SolverKind solver_used = SolverKind::Direct;
  ConvergenceTrace trace;
  FitOptions options;
  double target_offset = 0.0;
};

struct PredictionResult {
  Vector mean;
  std::optional<Vector> variance;
  std::vector<std::string> warnings;
};

/// Variances below this are reported before being clamped to zero.
inline constexpr double kVarianceWarnThreshold = -1e-8;
/// Right-hand sides handled together in variance solves.
inline constexpr Index kVarianceBatch = 16;

namespace detail {

inline void require_converged(const ConvergenceTrace& t, SolverKind kind, const char* what) {
  if (!t.converged())
    throw FitError(std::string(what) + ": " + std::string(to_string(kind)) + " terminated with " +
                       std::string(to_string(t.termination)) +
                       (t.message.empty() ? "" : " (" + t.message + ")"),
                   t);
}

inline void require_matching_dimension(const RegressionModel& m, const Dataset& test) {
  if (test.n() > 0 && test.d() != m.train.d())
    throw InvalidInput("predict: test dimension " + std::to_string(test.d()) +
                       " does not match training dimension " + std::to_string(m.train.d()));
}

}  // namespace detail

inline RegressionModel fit(const Dataset& train, const KernelSpec& spec, const FitOptions& opts = {}) {
  if (!train.has_targets()) throw InvalidInput("fit: training set has no targets");
  spec.validate();
  RegressionModel m;
  m.train = train;
  m.spec = spec;
  m.options = opts;
  m.solver_used = opts.solve.solver;
  Vector y = train.targets();
  if (opts.center_targets) {
    m.target_offset = y.mean();
    y.array() -= m.target_offset;
  }
  KernelSystemSolver solver(KernelOperator(train, spec), opts.solve);
  SolveResult r = solver.solve(y);
  detail::require_converged(r.trace, opts.solve.solver, "fit");
  if (!r.x.allFinite()) throw FitError("fit: non-finite weights", r.trace);
  m.weights = std::move(r.x);
  m.trace = std::move(r.trace);
  return m;
}

/// m(x*) = k(x*)^T alpha.
inline Vector predict_mean(const RegressionModel& model, const Dataset& test) {
  detail::require_matching_dimension(model, test);
  Vector mean = cross_kernel_product(model.train, model.spec, test, model.weights);
  mean.array() += model.target_offset;
  return mean;
}

/// Mean and, optionally, the latent posterior variance
/// k(x*, x*) - k(x*)^T (Khat + gamma I)^{-1} k(x*), one solve per test point
/// with the fit's solver.
inline PredictionResult predict(const RegressionModel& model, const Dataset& test, bool with_variance) {
  PredictionResult out;
  out.mean = predict_mean(model, test);
  if (!with_variance) return out;

  KernelSystemSolver solver(KernelOperator(model.train, model.spec), model.options.solve);
  const Index nt = test.n();
  const Index n = model.train.n();
  Vector var(nt);
  Index clamped = 0;
  for (Index t0 = 0; t0 < nt; t0 += kVarianceBatch) {
    const Index cols = std::min(kVarianceBatch, nt - t0);
    Matrix kstar(n, cols);
    for (Index c = 0; c < cols; ++c)
      kstar.col(c) = cross_kernel_column(model.train, model.spec, test.point(t0 + c));
    std::vector<ConvergenceTrace> traces;
    const Matrix s = solver.solve_many(kstar, &traces);
    for (const ConvergenceTrace& t : traces)
      detail::require_converged(t, model.options.solve.solver, "predict_variance");
    for (Index c = 0; c < cols; ++c) {
      const auto xs = test.point(t0 + c);
      double v = eval_kernel(model.spec, xs, xs) - kstar.col(c).dot(s.col(c));
      if (v < kVarianceWarnThreshold) ++clamped;
      var(t0 + c) = std::max(v, 0.0);
    }
  }
  if (clamped > 0)
    out.warnings.push_back("predict_variance: " + std::to_string(clamped) +
                           " variance(s) below -1e-8 clamped to 0");
  out.variance = std::move(var);
  return out;
}

inline Vector predict_variance(const RegressionModel& model, const Dataset& test) {
  return *predict(model, test, true).variance;
}

/// y* = k(x*)^T (Khat + gamma I)^{-1} y: the same computation as fit followed
/// by predict_mean.
inline Vector simple_krige(const Dataset& train, const KernelSpec& spec, const Dataset& test,
                           const FitOptions& opts = {}) {
  return predict_mean(fit(train, spec, opts), test);
}

struct GridSearchOptions {
  KernelFamily family = KernelFamily::Gaussian;
  std::uint64_t seed = 20100901;
  Index dense_cap = kDefaultDenseCap;
};

struct GridSearchResult {
  KernelSpec best;
  double best_log_likelihood = -std::numeric_limits<double>::infinity();
  /// scores(i, j) for bandwidths[i], regularizers[j]; -inf where Cholesky failed.
  Matrix scores;
  std::vector<Index> subset;
  std::vector<std::string> warnings;
};

inline Index default_ml_subset(Index n) { return std::min<Index>(n, 1000); }

/// Deterministic uniform subsample of `count` indices, sorted.
inline std::vector<Index> deterministic_subset(Index n, Index count, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (count >= n) return idx;
  std::mt19937_64 gen(seed);
  std::shuffle(idx.begin(), idx.end(), gen);
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// -1/2 y^T K^{-1} y - 1/2 log|K| - n/2 log(2 pi) by dense Cholesky.
inline double log_marginal_likelihood(const Dataset& data, const KernelSpec& spec,
                                      Index dense_cap = kDefaultDenseCap) {
  const Matrix k = build_dense_kernel(data, spec, dense_cap);
  const CholeskyFactor f(k);
  const Vector& y = data.targets();
  const Vector alpha = f.solve(y);
  const double n = static_cast<double>(data.n());
  return -0.5 * y.dot(alpha) - 0.5 * f.log_determinant() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

/// Maximum-likelihood hyperparameters over a bandwidth x regularizer grid,
/// scored on a deterministic subset. Ties go to the larger regularizer, then
/// to the smaller bandwidth, so the result does not depend on grid order.
inline GridSearchResult ml_grid_search(const Dataset& train, Index subset_size,
                                       std::span<const double> bandwidths,
                                       std::span<const double> regularizers,
                                       const GridSearchOptions& opts = {}) {
  if (!train.has_targets()) throw InvalidInput("ml_grid_search: training set has no targets");
  if (bandwidths.empty() || regularizers.empty())
    throw InvalidInput("ml_grid_search: grids must be non-empty");
  if (subset_size < 1 || subset_size > train.n())
    throw InvalidInput("ml_grid_search: subset size must be in [1, N]");

  GridSearchResult out;
  out.subset = deterministic_subset(train.n(), subset_size, opts.seed);
  const Dataset sub = train.subset(out.subset);
  out.scores.resize(static_cast<Index>(bandwidths.size()), static_cast<Index>(regularizers.size()));

  bool found = false;
  for (std::size_t i = 0; i < bandwidths.size(); ++i) {
    for (std::size_t j = 0; j < regularizers.size(); ++j) {
      const KernelSpec spec{opts.family, bandwidths[i], regularizers[j]};
      spec.validate();
      double ll = -std::numeric_limits<double>::infinity();
      try {
        ll = log_marginal_likelihood(sub, spec, opts.dense_cap);
      } catch (const NotPositiveDefinite& e) {
        out.warnings.push_back("ml_grid_search: bandwidth=" + std::to_string(spec.bandwidth) +
                               " regularizer=" + std::to_string(spec.regularizer) + ": " + e.what());
      }
      out.scores(static_cast<Index>(i), static_cast<Index>(j)) = ll;
      if (ll == -std::numeric_limits<double>::infinity()) continue;
      const bool better =
          !found || ll > out.best_log_likelihood ||
          (ll == out.best_log_likelihood &&
           (spec.regularizer > out.best.regularizer ||
            (spec.regularizer == out.best.regularizer && spec.bandwidth < out.best.bandwidth)));
      if (better) {
        found = true;
        out.best = spec;
        out.best_log_likelihood = ll;
      }
    }
  }
  if (!found) throw NotPositiveDefinite("ml_grid_search: every grid point failed", -1);
  return out;
}

}  // namespace kryreg
