#pragma once

// Named experiment bundles behind `kryreg_bench sweep --preset`.

#include "kryreg/bench/experiment.hpp"
#include "kryreg/bench/studies.hpp"
#include "kryreg/bench/synthetic.hpp"
#include "kryreg/error.hpp"

#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kryreg::bench {

/// Knobs shared by every preset; unset fields keep the preset's own value.
struct PresetParams {
  std::uint64_t seed = 1;
  std::optional<Index> n;
  std::optional<Index> d;
  KernelFamily family = KernelFamily::Gaussian;
  SolverConfig outer;
  Index dense_cap = kDefaultDenseCap;
  /// Required by table1.
  std::vector<CsvSource> csv_sources;
};

struct Preset {
  std::string name;
  /// Each experiment is written to its own subdirectory, named after it.
  std::vector<ExperimentConfig> experiments;
  std::optional<ConditioningStudy> conditioning;
  /// Points for the conditioning study.
  std::optional<SyntheticSource> conditioning_source;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2-3", "fig4", "table1", "kriging"};
  return names;
}

namespace detail {

inline std::string num_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline SolverEntry entry(std::string label, SolverKind kind, const SolverConfig& outer,
                         std::optional<PreconditionerConfig> prec = std::nullopt) {
  SolverEntry e{std::move(label), {}};
  e.options.solver = kind;
  e.options.config = outer;
  e.options.preconditioner = prec;
  return e;
}

inline ExperimentConfig base_config(std::string name, const PresetParams& p, double bandwidth,
                                    double regularizer) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.source = SyntheticSource{p.n.value_or(2000), p.d.value_or(3), p.seed, false};
  c.kernel = {p.family, bandwidth, regularizer};
  c.seed = p.seed;
  c.dense_cap = p.dense_cap;
  c.reference_config = p.outer;
  return c;
}

inline std::vector<ExperimentConfig> parameter_sweeps(const PresetParams& p) {
  // One moderately ill-conditioned system; the other parameter sits at its
  // rule value (delta = 10 gamma, eps = 10 tol).
  constexpr double kBandwidth = 1.0;
  constexpr double kGamma = 1e-4;
  const PreconditionerConfig rules = PreconditionerConfig::from_rules(kGamma, p.outer.tolerance);

  ExperimentConfig delta = base_config("delta-sweep", p, kBandwidth, kGamma);
  ExperimentConfig eps = base_config("eps-sweep", p, kBandwidth, kGamma);
  for (SolverKind kind : {SolverKind::FGMRES, SolverKind::FCG}) {
    const std::string k(to_string(kind));
    for (double d : {1e-4, 1e-2, 1.0}) {
      PreconditionerConfig pc = rules;
      pc.delta = d;
      delta.solvers.push_back(entry(k + "-delta=" + num_label(d), kind, p.outer, pc));
    }
    for (double e : {1e-1, 1e-3, 1e-5}) {
      PreconditionerConfig pc = rules;
      pc.inner_tolerance = e;
      eps.solvers.push_back(entry(k + "-eps=" + num_label(e), kind, p.outer, pc));
    }
  }
  return {delta, eps};
}

inline std::vector<SolverEntry> full_lineup(const PresetParams& p, bool with_ilu) {
  std::vector<SolverEntry> s{entry("cg", SolverKind::CG, p.outer), entry("gmres", SolverKind::GMRES, p.outer),
                             entry("fgmres", SolverKind::FGMRES, p.outer), entry("fcg", SolverKind::FCG, p.outer)};
  if (with_ilu) s.push_back(entry("ilu-cg", SolverKind::IluCG, p.outer));
  return s;
}

}  // namespace detail

/// Builds a preset. Throws InvalidInput for unknown names, or for table1
/// without CSV sources.
inline Preset make_preset(std::string_view name, const PresetParams& p = {}) {
  Preset out;
  out.name = std::string(name);
  if (name == "fig1") {
    ConditioningStudy s;
    s.family = p.family;
    s.cg = p.outer;
    s.cg.max_iterations = std::max(s.cg.max_iterations, 20000);
    s.seed = p.seed;
    out.conditioning = s;
    out.conditioning_source = SyntheticSource{p.n.value_or(2000), p.d.value_or(3), p.seed, false};
  } else if (name == "fig2-3") {
    out.experiments = detail::parameter_sweeps(p);
  } else if (name == "fig4") {
    for (double bw : {0.5, 1.0, 2.0}) {
      ExperimentConfig c = detail::base_config("sigma=" + detail::num_label(bw), p, bw, 1e-4);
      c.solvers = detail::full_lineup(p, true);
      out.experiments.push_back(std::move(c));
    }
  } else if (name == "table1") {
    if (p.csv_sources.empty()) throw InvalidInput("preset table1 needs at least one --csv file");
    for (const CsvSource& src : p.csv_sources) {
      ExperimentConfig c;
      c.name = std::filesystem::path(src.path).stem().string();
      c.source = src;
      c.mode = ExperimentMode::Regression;
      c.kernel.family = p.family;
      c.ml_grid = MlGridRequest{{0.05, 0.1, 0.2, 0.5, 1.0, 2.0}, {1e-4, 1e-3, 1e-2, 1e-1}, 1000};
      c.seed = p.seed;
      c.dense_cap = p.dense_cap;
      c.reference_config = p.outer;
      c.solvers = detail::full_lineup(p, false);
      c.solvers.insert(c.solvers.begin(), detail::entry("direct", SolverKind::Direct, p.outer));
      out.experiments.push_back(std::move(c));
    }
  } else if (name == "kriging") {
    const Index side = p.n ? std::max<Index>(2, static_cast<Index>(std::lround(std::sqrt(double(*p.n))))) : 100;
    const GridField g = generate_grid_field(side, side, 0.3, p.seed);
    ExperimentConfig c;
    c.name = "grid-" + std::to_string(side) + "x" + std::to_string(side);
    c.dataset = g.observed();
    c.test_dataset = g.held_out();
    c.mode = ExperimentMode::Regression;
    c.kernel.family = p.family;
    c.ml_grid = MlGridRequest{{0.02, 0.05, 0.1, 0.2}, {1e-4, 1e-3, 1e-2}, 1000};
    c.seed = p.seed;
    c.dense_cap = p.dense_cap;
    c.reference_config = p.outer;
    // On the grid the kernel spectrum is spread evenly down to gamma, so
    // delta = 10 gamma leaves about twenty outer iterations at tight
    // tolerances; delta = gamma with a loose inner solve keeps them single
    // digit for less total inner work.
    SolverEntry fg = detail::entry("fgmres", SolverKind::FGMRES, p.outer);
    fg.options.rules.delta_ratio = 1.0;
    fg.options.rules.inner_tolerance = 1e-4;
    c.solvers = {detail::entry("cg", SolverKind::CG, p.outer), fg};
    out.experiments.push_back(std::move(c));
  } else {
    throw InvalidInput("unknown preset '" + std::string(name) + "'");
  }
  return out;
}

}  // namespace kryreg::bench
