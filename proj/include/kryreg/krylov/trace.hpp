#pragma once

#include "kryreg/types.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kryreg {

enum class Termination { Converged, MaxIterations, Breakdown, Stagnation };

inline constexpr std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::Breakdown: return "breakdown";
    case Termination::Stagnation: return "stagnation";
  }
  return "unknown";
}

struct TraceRecord {
  double residual = 0.0;
  std::uint64_t full_mvps = 0;
  std::uint64_t reduced_mvps = 0;
  std::uint64_t inner_iterations = 0;
  double elapsed_ms = 0.0;
};

/// Per-iteration history of one solve. records[0] is the initial residual, so
/// records.size() == iterations() + 1. Residuals are in the solver's stopping
/// norm; counters are cumulative.
struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  Termination termination = Termination::MaxIterations;
  std::string message;
  int restarts = 0;
  /// Inner solves that hit their iteration cap.
  std::uint64_t inner_capped = 0;
  /// Worst max|v_i^T v_j - delta_ij| seen (GMRES family, check_arnoldi).
  double max_orthogonality_loss = 0.0;
  /// Worst ||A Z_k - V_{k+1} H_k||_F / ||H_k||_F seen (check_arnoldi).
  double max_arnoldi_residual = 0.0;

  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
  bool converged() const { return termination == Termination::Converged; }
  double initial_residual() const { return records.empty() ? 0.0 : records.front().residual; }
  double final_residual() const { return records.empty() ? 0.0 : records.back().residual; }
  std::uint64_t full_mvps() const { return records.empty() ? 0 : records.back().full_mvps; }
  std::uint64_t reduced_mvps() const { return records.empty() ? 0 : records.back().reduced_mvps; }
  std::uint64_t inner_iterations() const {
    return records.empty() ? 0 : records.back().inner_iterations;
  }
  double elapsed_ms() const { return records.empty() ? 0.0 : records.back().elapsed_ms; }
};

namespace detail {

/// Accumulates counters while a solver runs and stamps trace records.
class TraceRecorder {
 public:
  using Clock = std::chrono::steady_clock;

  explicit TraceRecorder(ConvergenceTrace& trace) : trace_(trace), start_(Clock::now()) {}

  void add_outer_mvp(Precision p) {
    if (p == Precision::Full) ++full_; else ++reduced_;
  }
  void add_inner(std::uint64_t iterations, std::uint64_t full, std::uint64_t reduced,
                 std::uint64_t capped) {
    inner_ += iterations;
    full_ += full;
    reduced_ += reduced;
    trace_.inner_capped += capped;
  }

  void record(double residual) {
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    trace_.records.push_back({residual, full_, reduced_, inner_, ms});
  }

  void finish(Termination t, std::string message = {}) {
    trace_.termination = t;
    trace_.message = std::move(message);
  }

 private:
  ConvergenceTrace& trace_;
  Clock::time_point start_;
  std::uint64_t full_ = 0;
  std::uint64_t reduced_ = 0;
  std::uint64_t inner_ = 0;
};

}  // namespace detail

struct SolveResult {
  Vector x;
  ConvergenceTrace trace;
};

}  // namespace kryreg
