/// @file trace.hpp
/// @brief Per-step record of an iterative solve.

#pragma once

#include "hybrid/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hybrid {

enum class StepKind { Initial, Smooth, Correct, VCycle };
enum class SolveStatus { Converged, Diverged, MaxIter };

std::string to_string(StepKind kind);
std::string to_string(SolveStatus status);

struct TraceEntry {
  std::size_t step = 0;
  StepKind kind = StepKind::Initial;
  double residual_l2 = 0.0;
  std::optional<double> error_l2;
  /// Cumulative wall time since the start of the solve.
  double time_ms = 0.0;
};

struct IterationTrace {
  std::vector<TraceEntry> entries;
  /// Error vectors mu_ref - mu per entry, kept only when requested.
  std::vector<Vector> error_vectors;
  SolveStatus status = SolveStatus::MaxIter;
  /// Steps taken after the initial state.
  std::size_t iterations = 0;
  Vector solution;
  double total_time_ms = 0.0;
  /// Portion of total_time_ms spent inside corrector calls.
  double corrector_time_ms = 0.0;

  std::vector<double> residuals() const;
};

/// CSV with header step,kind,residual_l2,error_l2,time_ms. The error column
/// is left empty when no reference solution was supplied.
void write_trace_csv(const IterationTrace& trace, std::ostream& os);

}  // namespace hybrid
