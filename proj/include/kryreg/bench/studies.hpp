#pragma once

#include "kryreg/bench/csv.hpp"
#include "kryreg/bench/output.hpp"
#include "kryreg/dataset.hpp"
#include "kryreg/diagnostics.hpp"
#include "kryreg/kernel.hpp"
#include "kryreg/krylov/cg.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kryreg::bench {

/// One (bandwidth, regularizer) point of a conditioning study.
struct ConditioningRow {
  std::string sweep;
  double bandwidth = 0.0;
  double regularizer = 0.0;
  ConditionEstimate estimate;
  int cg_iterations = 0;
  Termination cg_termination = Termination::Converged;
};

struct ConditioningStudy {
  KernelFamily family = KernelFamily::Gaussian;
  std::vector<double> bandwidths{0.1, 0.5, 1.0, 2.0};
  /// Regularizer held fixed during the bandwidth sweep.
  double sweep_regularizer = 1e-4;
  std::vector<double> regularizers{1e-8, 1e-4, 1e-2, 1.0};
  /// Bandwidth held fixed during the regularizer sweep.
  double sweep_bandwidth = 1.0;
  int lanczos_steps = 0;
  /// Stopping rule for the CG runs (b = K x_true, x_true seeded).
  SolverConfig cg;
  std::uint64_t seed = 1;
};

/// Estimated condition number and unpreconditioned CG iterations across a
/// bandwidth sweep and a regularizer sweep on fixed points.
inline std::vector<ConditioningRow> run_conditioning_study(const Dataset& data, const ConditioningStudy& s) {
  std::vector<ConditioningRow> rows;
  const Vector x_true = seeded_solution(data.n(), s.seed);
  const int steps = s.lanczos_steps > 0 ? s.lanczos_steps : default_lanczos_steps(data.n());
  const auto one = [&](const std::string& sweep, double bw, double reg) {
    const KernelOperator op(data, {s.family, bw, reg});
    ConditioningRow r;
    r.sweep = sweep;
    r.bandwidth = bw;
    r.regularizer = reg;
    r.estimate = estimate_condition(op, steps);
    const SolveResult cg_run = cg(op, op.apply(x_true), s.cg);
    r.cg_iterations = cg_run.trace.iterations();
    r.cg_termination = cg_run.trace.termination;
    rows.push_back(r);
  };
  for (double bw : s.bandwidths) one("bandwidth", bw, s.sweep_regularizer);
  for (double reg : s.regularizers) one("regularizer", s.sweep_bandwidth, reg);
  return rows;
}

inline std::filesystem::path write_conditioning_csv(const std::vector<ConditioningRow>& rows,
                                                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "conditioning.csv";
  auto out = detail::open_for_write(path);
  out << "sweep,bandwidth,regularizer,lambda_min,lambda_max,kappa,lanczos_steps,lanczos_converged,"
         "cg_iters,cg_termination\n";
  for (const ConditioningRow& r : rows)
    out << r.sweep << ',' << detail::fmt_double(r.bandwidth) << ',' << detail::fmt_double(r.regularizer) << ','
        << detail::fmt_double(r.estimate.lambda_min) << ',' << detail::fmt_double(r.estimate.lambda_max) << ','
        << detail::fmt_double(r.estimate.kappa) << ',' << r.estimate.lanczos_steps << ','
        << (r.estimate.converged ? "true" : "false") << ',' << r.cg_iterations << ','
        << to_string(r.cg_termination) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
  return path;
}

}  // namespace kryreg::bench
