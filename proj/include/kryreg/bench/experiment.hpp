#pragma once

// Solver shoot-outs on one kernel system: every solver in an experiment sees
// the same operator, right-hand side and initial guess.

#include "kryreg/bench/csv.hpp"
#include "kryreg/bench/synthetic.hpp"
#include "kryreg/dataset.hpp"
#include "kryreg/error.hpp"
#include "kryreg/kernel.hpp"
#include "kryreg/regression.hpp"
#include "kryreg/solve.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace kryreg::bench {

struct SyntheticSource {
  Index n = 2000;
  Index d = 3;
  std::uint64_t seed = 1;
  bool targets = false;
};

struct CsvSource {
  std::string path;
  CsvSchema schema;
};

/// b = K x_true with a seeded x_true (System), or b = y on a seeded train
/// split with predictions scored on the rest (Regression).
enum class ExperimentMode { System, Regression };

struct SolverEntry {
  std::string label;
  SolveOptions options;
};

struct MlGridRequest {
  std::vector<double> bandwidths;
  std::vector<double> regularizers;
  Index subset_size = 1000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::variant<SyntheticSource, CsvSource> source = SyntheticSource{};
  /// Replaces `source` when set.
  std::optional<Dataset> dataset;
  /// Regression only: score on these points instead of a random split.
  std::optional<Dataset> test_dataset;
  KernelSpec kernel;
  std::optional<MlGridRequest> ml_grid;
  std::vector<SolverEntry> solvers;
  ExperimentMode mode = ExperimentMode::System;
  double train_fraction = 0.9;
  std::uint64_t seed = 1;
  Index dense_cap = kDefaultDenseCap;
  /// Stopping rule used by the reference solve when it is CG.
  SolverConfig reference_config;

  void validate() const {
    if (solvers.empty()) throw InvalidInput("experiment '" + name + "': no solvers requested");
    kernel.validate();
  }
};

struct SolverRow {
  std::string label;
  SolverKind solver = SolverKind::CG;
  std::string preconditioner;
  int outer_iterations = 0;
  std::uint64_t inner_iterations = 0;
  std::uint64_t full_mvps = 0;
  std::uint64_t reduced_mvps = 0;
  double setup_ms = 0.0;
  /// Setup (dense build and factorization, if any) plus solve.
  double wall_ms = 0.0;
  /// ||b - K x|| in the solver's stopping norm, recomputed in full precision.
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  /// Mean absolute difference to the reference (solution in System mode,
  /// test predictions in Regression mode).
  double agreement = std::numeric_limits<double>::quiet_NaN();
  Termination termination = Termination::Breakdown;
  std::string error;
  ConvergenceTrace trace;
  Vector solution;
  Vector predictions;
};

struct ExperimentReport {
  std::string name;
  ExperimentMode mode = ExperimentMode::System;
  Index n = 0;
  Index d = 0;
  Index n_test = 0;
  Index dropped_rows = 0;
  KernelSpec kernel;
  std::string reference;
  std::vector<SolverRow> rows;
  std::vector<std::string> notes;
};

/// Uniform [-1, 1] entries from a seeded stream.
inline Vector seeded_solution(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed ^ 0x7a3b5c1dULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = dist(gen);
  return x;
}

inline Dataset load_dataset(const ExperimentConfig& cfg, Index* dropped = nullptr) {
  if (cfg.dataset) return *cfg.dataset;
  if (const auto* s = std::get_if<SyntheticSource>(&cfg.source))
    return generate_synthetic(s->n, s->d, s->seed, s->targets || cfg.mode == ExperimentMode::Regression);
  const auto& c = std::get<CsvSource>(cfg.source);
  IngestResult r = ingest_csv(c.path, c.schema);
  if (dropped) *dropped = r.dropped_rows;
  return std::move(r.data);
}

namespace detail {

inline double mean_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return (a - b).cwiseAbs().mean();
}

inline SolverRow run_one(const SolverEntry& entry, const KernelOperator& op, const Vector& b,
                         const Dataset& train, const Dataset* test, const KernelSpec& spec) {
  SolverRow row;
  row.label = entry.label;
  row.solver = entry.options.solver;
  if (entry.options.solver == SolverKind::FGMRES || entry.options.solver == SolverKind::FCG) {
    const auto p = entry.options.effective_preconditioner(spec.regularizer);
    row.preconditioner = regularized_kernel_preconditioner(op, p).description();
  } else if (entry.options.solver == SolverKind::IluCG) {
    row.preconditioner = "ilu0(tau=" + std::to_string(entry.options.ilu_threshold) + ")";
  }
  try {
    const auto t0 = std::chrono::steady_clock::now();
    KernelSystemSolver solver(op, entry.options);
    SolveResult r = solver.solve(b);
    const auto t1 = std::chrono::steady_clock::now();
    row.setup_ms = solver.setup_ms();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    row.trace = std::move(r.trace);
    row.termination = row.trace.termination;
    if (!row.trace.message.empty() && !row.trace.converged()) row.error = row.trace.message;
    row.outer_iterations = row.trace.iterations();
    row.inner_iterations = row.trace.inner_iterations();
    row.full_mvps = row.trace.full_mvps();
    row.reduced_mvps = row.trace.reduced_mvps();
    Vector kx;
    op.with_precision(Precision::Full).apply(r.x, kx);
    row.final_residual = residual_norm(entry.options.config.norm, b - kx, b);
    if (test) row.predictions = cross_kernel_product(train, spec, *test, r.x);
    row.solution = std::move(r.x);
  } catch (const Error& e) {
    row.termination = Termination::Breakdown;
    row.error = e.what();
  }
  return row;
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  rep.name = cfg.name;
  rep.mode = cfg.mode;
  Dataset data = load_dataset(cfg, &rep.dropped_rows);

  Dataset train = data;
  std::optional<Dataset> test;
  if (cfg.mode == ExperimentMode::Regression) {
    if (!data.has_targets()) throw InvalidInput("run_experiment: regression needs targets");
    if (cfg.test_dataset) {
      test = *cfg.test_dataset;
    } else {
      auto [tr, te] = train_test_split(data, cfg.train_fraction, cfg.seed);
      train = std::move(tr);
      test = std::move(te);
      rep.notes.push_back("seeded train/test split: " + std::to_string(train.n()) + "/" +
                          std::to_string(test->n()));
    }
  }

  KernelSpec spec = cfg.kernel;
  if (cfg.ml_grid) {
    const auto& g = *cfg.ml_grid;
    GridSearchOptions gopts;
    gopts.family = spec.family;
    gopts.seed = cfg.seed;
    gopts.dense_cap = cfg.dense_cap;
    const Index subset = std::min(g.subset_size, train.n());
    const GridSearchResult gs = ml_grid_search(train, subset, g.bandwidths, g.regularizers, gopts);
    spec = gs.best;
    for (const auto& w : gs.warnings) rep.notes.push_back(w);
    rep.notes.push_back("ml grid search on " + std::to_string(subset) + " points selected bandwidth=" +
                        std::to_string(spec.bandwidth) + " regularizer=" + std::to_string(spec.regularizer));
  }
  rep.kernel = spec;
  rep.n = train.n();
  rep.d = train.d();
  rep.n_test = test ? test->n() : 0;

  const KernelOperator op(train, spec);
  Vector b;
  if (cfg.mode == ExperimentMode::System) {
    op.apply(seeded_solution(train.n(), cfg.seed), b);
  } else {
    b = train.targets();
  }

  for (const SolverEntry& e : cfg.solvers)
    rep.rows.push_back(detail::run_one(e, op, b, train, test ? &*test : nullptr, spec));

  // Reference: Direct when the dense matrix fits, otherwise CG.
  const SolverKind ref_kind = train.n() <= cfg.dense_cap ? SolverKind::Direct : SolverKind::CG;
  const SolverRow* ref = nullptr;
  for (const SolverRow& r : rep.rows)
    if (r.solver == ref_kind && r.error.empty() && r.termination == Termination::Converged) {
      ref = &r;
      break;
    }
  SolverRow ref_row;
  if (!ref) {
    SolverEntry e{std::string(to_string(ref_kind)), {}};
    e.options.solver = ref_kind;
    e.options.config = cfg.reference_config;
    e.options.dense_cap = cfg.dense_cap;
    ref_row = detail::run_one(e, op, b, train, test ? &*test : nullptr, spec);
    ref = &ref_row;
  }
  rep.reference = std::string(to_string(ref_kind));
  if (!ref->error.empty()) rep.notes.push_back("reference solve failed: " + ref->error);
  for (SolverRow& r : rep.rows) {
    if (!r.error.empty() || !ref->error.empty()) continue;
    r.agreement = cfg.mode == ExperimentMode::System ? detail::mean_abs_diff(r.solution, ref->solution)
                                                     : detail::mean_abs_diff(r.predictions, ref->predictions);
  }
  return rep;
}

}  // namespace kryreg::bench
