#pragma once

#include "kryreg/error.hpp"
#include "kryreg/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace kryreg {

/// Scalar read of the stopping rule.
///  - TwoNorm:      ||b - A x||_2 / ||b||_2
///  - TwoNormOverN: ||b - A x||_2 / N
enum class ResidualNorm { TwoNorm, TwoNormOverN };

inline constexpr std::string_view to_string(ResidualNorm m) {
  return m == ResidualNorm::TwoNorm ? "two-norm" : "two-norm-over-n";
}

inline ResidualNorm parse_residual_norm(std::string_view s) {
  if (s == "two-norm" || s == "relative") return ResidualNorm::TwoNorm;
  if (s == "two-norm-over-n" || s == "over-n") return ResidualNorm::TwoNormOverN;
  throw InvalidInput("unknown residual norm '" + std::string(s) + "'");
}

struct SolverConfig {
  double tolerance = 1e-6;
  /// Total outer iterations (Arnoldi steps for the GMRES family) across restarts.
  int max_iterations = 10000;
  /// Cycle length m for GMRES/FGMRES.
  int restart = 50;
  ResidualNorm norm = ResidualNorm::TwoNormOverN;
  /// Track basis orthonormality and the Arnoldi relation at every step.
  bool check_arnoldi = false;
  /// Called with (iteration, current iterate) after every outer iteration.
  /// For the GMRES family this forces the iterate to be formed every step.
  std::function<void(int, const Vector&)> on_iterate;

  void validate() const {
    if (!(tolerance > 0.0)) throw InvalidInput("SolverConfig: tolerance must be positive");
    if (restart < 1) throw InvalidInput("SolverConfig: restart length must be >= 1");
    if (max_iterations < 0) throw InvalidInput("SolverConfig: max_iterations must be >= 0");
  }
};

/// M = K + delta*I applied by truncated inner CG.
struct PreconditionerConfig {
  double delta = 1e-2;
  double inner_tolerance = 1e-4;
  /// 0 means N (the full Krylov dimension).
  int max_inner_iterations = 0;
  Precision inner_precision = Precision::Reduced;

  void validate() const {
    if (!(delta > 0.0)) throw InvalidInput("PreconditionerConfig: delta must be positive");
    if (!(inner_tolerance > 0.0))
      throw InvalidInput("PreconditionerConfig: inner tolerance must be positive");
    if (max_inner_iterations < 0)
      throw InvalidInput("PreconditionerConfig: max_inner_iterations must be >= 0");
  }

  /// Default parameter rules: inner tolerance one order of magnitude above the
  /// outer tolerance, delta one order above gamma (1e-3 when gamma is zero).
  static PreconditionerConfig from_rules(double gamma, double outer_tolerance) {
    PreconditionerConfig c;
    c.delta = gamma > 0.0 ? 10.0 * gamma : 1e-3;
    c.inner_tolerance = 10.0 * outer_tolerance;
    return c;
  }
};

/// A PreconditionerConfig derived from the system's gamma and the outer
/// tolerance when those are only known at solve time (after ML selection).
/// Defaults reproduce PreconditionerConfig::from_rules.
struct PreconditionerRules {
  /// delta = delta_ratio * gamma; 1e-3 when gamma is zero.
  double delta_ratio = 10.0;
  /// Fixed inner tolerance; unset means 10 * outer tolerance.
  std::optional<double> inner_tolerance;
  int max_inner_iterations = 0;
  Precision inner_precision = Precision::Reduced;

  PreconditionerConfig derive(double gamma, double outer_tolerance) const {
    PreconditionerConfig c = PreconditionerConfig::from_rules(gamma, outer_tolerance);
    if (gamma > 0.0) c.delta = delta_ratio * gamma;
    if (inner_tolerance) c.inner_tolerance = *inner_tolerance;
    c.max_inner_iterations = max_inner_iterations;
    c.inner_precision = inner_precision;
    c.validate();
    return c;
  }
};

namespace detail {

/// Multiplier turning ||r||_2 into the configured stopping quantity.
inline double residual_scale(ResidualNorm mode, Index n, double bnorm) {
  if (mode == ResidualNorm::TwoNormOverN) return 1.0 / static_cast<double>(n);
  return bnorm > 0.0 ? 1.0 / bnorm : 1.0;
}

}  // namespace detail

/// The stopping quantity for an explicit residual.
inline double residual_norm(ResidualNorm mode, const Vector& r, const Vector& b) {
  return r.norm() * detail::residual_scale(mode, b.size(), b.norm());
}

}  // namespace kryreg
