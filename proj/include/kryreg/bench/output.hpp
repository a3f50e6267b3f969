#pragma once

#include "kryreg/bench/experiment.hpp"
#include "kryreg/error.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifndef KRYREG_VERSION
#define KRYREG_VERSION "dev"
#endif

namespace kryreg::bench {

/// Column order of the comparison table.
inline const std::vector<std::string>& comparison_columns() {
  static const std::vector<std::string> cols{"solver",   "outer_iters",    "inner_iters",
                                             "full_mvps", "reduced_mvps", "wall_ms",
                                             "final_residual", "agreement"};
  return cols;
}

/// Column order of the per-solver residual history.
inline const std::vector<std::string>& history_columns() {
  static const std::vector<std::string> cols{"iter", "residual", "cumulative_inner", "elapsed_ms"};
  return cols;
}

struct OutputPaths {
  std::filesystem::path comparison;
  std::vector<std::filesystem::path> histories;
  std::filesystem::path manifest;
};

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string file_safe(const std::string& label) {
  std::string s;
  for (char c : label) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return s;
}

inline std::ofstream open_for_write(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

inline void join_header(std::ofstream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

}  // namespace detail

inline nlohmann::json to_json(const SolveOptions& o) {
  nlohmann::json j{{"solver", to_string(o.solver)},
                   {"tolerance", o.config.tolerance},
                   {"norm", to_string(o.config.norm)},
                   {"max_iterations", o.config.max_iterations},
                   {"restart", o.config.restart},
                   {"dense_cap", o.dense_cap}};
  if (o.solver == SolverKind::IluCG) j["ilu_threshold"] = o.ilu_threshold;
  if (o.preconditioner) {
    j["delta"] = o.preconditioner->delta;
    j["inner_tolerance"] = o.preconditioner->inner_tolerance;
    j["max_inner_iterations"] = o.preconditioner->max_inner_iterations;
    j["inner_precision"] = to_string(o.preconditioner->inner_precision);
  }
  return j;
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["mode"] = cfg.mode == ExperimentMode::System ? "system" : "regression";
  j["seed"] = cfg.seed;
  j["dense_cap"] = cfg.dense_cap;
  j["kernel"] = {{"family", to_string(cfg.kernel.family)},
                 {"bandwidth", cfg.kernel.bandwidth},
                 {"regularizer", cfg.kernel.regularizer}};
  if (cfg.dataset) {
    j["source"] = {{"type", "memory"}, {"n", cfg.dataset->n()}, {"d", cfg.dataset->d()}};
  } else if (const auto* s = std::get_if<SyntheticSource>(&cfg.source)) {
    j["source"] = {{"type", "synthetic"}, {"n", s->n}, {"d", s->d}, {"seed", s->seed}};
  } else {
    const auto& c = std::get<CsvSource>(cfg.source);
    j["source"] = {{"type", "csv"},
                   {"path", c.path},
                   {"target", c.schema.target_column},
                   {"features", c.schema.feature_columns},
                   {"missing", c.schema.missing_sentinel},
                   {"scale", c.schema.scale_features}};
  }
  if (cfg.test_dataset) j["test_source"] = {{"type", "memory"}, {"n", cfg.test_dataset->n()}};
  else if (cfg.mode == ExperimentMode::Regression) j["train_fraction"] = cfg.train_fraction;
  if (cfg.ml_grid)
    j["ml_grid"] = {{"bandwidths", cfg.ml_grid->bandwidths},
                    {"regularizers", cfg.ml_grid->regularizers},
                    {"subset_size", cfg.ml_grid->subset_size}};
  for (const SolverEntry& e : cfg.solvers) {
    nlohmann::json s = to_json(e.options);
    s["label"] = e.label;
    if (!e.options.preconditioner && (e.options.solver == SolverKind::FGMRES || e.options.solver == SolverKind::FCG)) {
      const auto p = e.options.effective_preconditioner(cfg.kernel.regularizer);
      s["delta"] = p.delta;
      s["inner_tolerance"] = p.inner_tolerance;
      s["inner_precision"] = to_string(p.inner_precision);
      s["preconditioner_rules"] = true;
    }
    j["solvers"].push_back(s);
  }
  return j;
}

/// Writes comparison.csv, one trace_<label>.csv per solver and
/// manifest.json into `dir`.
inline OutputPaths emit_outputs(const ExperimentReport& report, const ExperimentConfig& cfg,
                                const std::filesystem::path& dir,
                                const nlohmann::json& extra_manifest = nlohmann::json::object()) {
  if (report.rows.empty()) throw InvalidInput("emit_outputs: report has no solver rows");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  OutputPaths paths;
  paths.comparison = dir / "comparison.csv";
  {
    auto out = detail::open_for_write(paths.comparison);
    detail::join_header(out, comparison_columns());
    for (const SolverRow& r : report.rows) {
      out << r.label << ',' << r.outer_iterations << ',' << r.inner_iterations << ',' << r.full_mvps
          << ',' << r.reduced_mvps << ',' << detail::fmt_double(r.wall_ms) << ','
          << detail::fmt_double(r.final_residual) << ',' << detail::fmt_double(r.agreement) << '\n';
    }
    if (!out) throw IoError("write to '" + paths.comparison.string() + "' failed");
  }

  for (const SolverRow& r : report.rows) {
    const auto p = dir / ("trace_" + detail::file_safe(r.label) + ".csv");
    auto out = detail::open_for_write(p);
    detail::join_header(out, history_columns());
    for (std::size_t i = 0; i < r.trace.records.size(); ++i) {
      const TraceRecord& t = r.trace.records[i];
      out << i << ',' << detail::fmt_double(t.residual) << ',' << t.inner_iterations << ','
          << detail::fmt_double(t.elapsed_ms) << '\n';
    }
    if (!out) throw IoError("write to '" + p.string() + "' failed");
    paths.histories.push_back(p);
  }

  nlohmann::json m;
  m["version"] = KRYREG_VERSION;
  m["config"] = to_json(cfg);
  m["seed"] = cfg.seed;
  m["dataset"] = {{"n", report.n}, {"d", report.d}, {"n_test", report.n_test},
                  {"dropped_rows", report.dropped_rows}};
  m["kernel"] = {{"family", to_string(report.kernel.family)},
                 {"bandwidth", report.kernel.bandwidth},
                 {"regularizer", report.kernel.regularizer}};
  m["reference"] = report.reference;
  m["notes"] = report.notes;
  for (const SolverRow& r : report.rows) {
    m["results"].push_back({{"label", r.label},
                            {"solver", to_string(r.solver)},
                            {"preconditioner", r.preconditioner},
                            {"termination", to_string(r.termination)},
                            {"error", r.error},
                            {"setup_ms", r.setup_ms},
                            {"restarts", r.trace.restarts},
                            {"inner_capped", r.trace.inner_capped}});
  }
  for (auto it = extra_manifest.begin(); it != extra_manifest.end(); ++it) m[it.key()] = it.value();
  paths.manifest = dir / "manifest.json";
  auto out = detail::open_for_write(paths.manifest);
  out << m.dump(2) << '\n';
  if (!out) throw IoError("write to '" + paths.manifest.string() + "' failed");
  return paths;
}

}  // namespace kryreg::bench
