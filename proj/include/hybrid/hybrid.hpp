/// @file hybrid.hpp
/// @brief Hybrid iteration: inner smoother or V-cycle steps interleaved with
/// a corrector step every M-th step, and M-sweep experiments.

#pragma once

#include "hybrid/correctors.hpp"
#include "hybrid/multigrid.hpp"
#include "hybrid/smoothers.hpp"
#include "hybrid/trace.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace hybrid {

using InnerMethod = std::variant<SmootherKind, std::shared_ptr<const MgHierarchy>>;

struct HybridConfig {
  /// Correction period: steps m with m % M == 0 are corrector steps.
  std::size_t M = 20;
  InnerMethod inner = SmootherKind::gauss_seidel();
  StopRule stop;
  /// Start from corrector.initial_guess(b) instead of zero.
  bool use_initial_guess = true;
  /// Store reference - mu after every step (needs a reference solution).
  bool keep_error_vectors = false;

  void validate() const;
};

/// Runs the hybrid loop. With a null corrector this is the plain inner
/// method from a zero start. The residual is recomputed from scratch after
/// every step.
IterationTrace hybrid_solve(const CsrMatrix& a, const Vector& b, const Corrector* corrector,
                            const HybridConfig& cfg, const std::optional<Vector>& reference = std::nullopt);

struct SweepRow {
  std::size_t M = 0;
  std::size_t iterations = 0;
  double time_s = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  /// Plain-method wall time over this run's wall time (0 when diverged or
  /// no baseline was run).
  double speedup = 0.0;
  /// Plain-method iterations over this run's iterations.
  double iteration_ratio = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<IterationTrace> plain;
};

/// Runs hybrid_solve for every M, recording divergence as data. When
/// run_plain is set the plain inner method is run first as the baseline.
SweepResult sweep_M(const CsrMatrix& a, const Vector& b, const Corrector& corrector,
                    const std::vector<std::size_t>& M_values, const HybridConfig& cfg_template,
                    bool run_plain = true);

/// Columns M,iterations,time_s,status,speedup. Diverged runs print "div."
/// in the iterations and speedup columns.
void write_sweep_csv(const SweepResult& sweep, std::ostream& os);

/// (r_last / r_{last-window})^(1/window) over the residual history.
double empirical_rate(const IterationTrace& trace, std::size_t window);

/// Geometric-mean residual contraction between consecutive corrector steps,
/// over the last `periods` complete periods.
double period_contraction(const IterationTrace& trace, std::size_t periods);

}  // namespace hybrid
