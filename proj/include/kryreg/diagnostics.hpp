#pragma once

#include "kryreg/error.hpp"
#include "kryreg/krylov/operator.hpp"
#include "kryreg/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kryreg {

struct ConditionEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double kappa = 0.0;
  int lanczos_steps = 0;
  /// Both extreme Ritz values moved by < 1e-6 (relative) over the last step,
  /// or the Krylov space became invariant.
  bool converged = false;
};

inline constexpr std::uint64_t kLanczosSeed = 0x5eed'1a2c'05ULL;
inline constexpr double kRitzConvergence = 1e-6;

inline int default_lanczos_steps(Index n) { return static_cast<int>(std::clamp<Index>(n, 2, 200)); }

namespace detail {

inline Vector seeded_unit_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(gen);
  return v / v.norm();
}

}  // namespace detail

/// Extreme eigenvalue estimates of a symmetric operator from Lanczos with
/// full reorthogonalization. Lanczos resolves lambda_max quickly; lambda_min
/// of a kernel matrix sits in a dense cluster and may be overestimated, which
/// `converged` reports.
template <LinearOperator Op>
ConditionEstimate estimate_condition(const Op& a, int steps) {
  if (steps < 2) throw InvalidInput("estimate_condition: steps must be >= 2");
  const Index n = a.size();
  if (n < 1) throw InvalidInput("estimate_condition: empty operator");

  {
    const Vector p = detail::seeded_unit_vector(n, kLanczosSeed + 1);
    const Vector q = detail::seeded_unit_vector(n, kLanczosSeed + 2);
    Vector ap, aq;
    a.apply(p, ap);
    a.apply(q, aq);
    const double lhs = q.dot(ap);
    const double rhs = p.dot(aq);
    if (std::abs(lhs - rhs) > 1e-8 * std::max(ap.norm(), aq.norm()))
      throw InvalidOperator("estimate_condition: operator is not symmetric");
  }

  const int max_steps = static_cast<int>(std::min<Index>(steps, n));
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(max_steps));
  std::vector<double> alpha;
  std::vector<double> beta;
  basis.push_back(detail::seeded_unit_vector(n, kLanczosSeed));

  ConditionEstimate est;
  double prev_max = 0.0;
  double prev_min = 0.0;
  Vector w(n);
  for (int j = 0; j < max_steps; ++j) {
    const Vector& q = basis.back();
    a.apply(q, w);
    alpha.push_back(q.dot(w));
    // Full reorthogonalization, two passes.
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& u : basis) w.noalias() -= u.dot(w) * u;
    const double b = w.norm();

    const Index k = static_cast<Index>(alpha.size());
    Vector diag = Eigen::Map<const Vector>(alpha.data(), k);
    Vector sub = Eigen::Map<const Vector>(beta.data(), k - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const double lmax = tri.eigenvalues()(k - 1);
    const double lmin = tri.eigenvalues()(0);

    est.lanczos_steps = j + 1;
    est.lambda_max = lmax;
    est.lambda_min = lmin;
    if (j > 0) {
      est.converged = std::abs(lmax - prev_max) < kRitzConvergence * std::abs(lmax) &&
                      std::abs(lmin - prev_min) < kRitzConvergence * std::abs(lmin);
    }
    prev_max = lmax;
    prev_min = lmin;

    const double anorm = std::max(std::abs(lmax), std::abs(lmin));
    if (b <= 1e-12 * anorm || j + 1 == max_steps) {
      if (b <= 1e-12 * anorm || k == n) est.converged = true;
      break;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  est.kappa = est.lambda_max / est.lambda_min;
  return est;
}

/// Upper bound 2 ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^k on the CG error
/// reduction in the A-norm.
inline double cg_bound(double kappa, int k) {
  if (!(kappa >= 1.0)) throw InvalidInput("cg_bound: kappa must be >= 1");
  if (k < 0) throw InvalidInput("cg_bound: k must be >= 0");
  const double s = std::sqrt(kappa);
  return 2.0 * std::pow((s - 1.0) / (s + 1.0), k);
}

}  // namespace kryreg
