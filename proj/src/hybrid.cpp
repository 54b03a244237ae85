/// @file hybrid.cpp
/// @brief Hybrid loop and M-sweep driver.

#include "hybrid/hybrid.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace hybrid {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void HybridConfig::validate() const {
  if (M < 1) throw std::invalid_argument("hybrid: correction period M must be >= 1");
  stop.validate();
  if (const auto* s = std::get_if<SmootherKind>(&inner)) {
    s->validate();
  } else if (!std::get<std::shared_ptr<const MgHierarchy>>(inner)) {
    throw std::invalid_argument("hybrid: multigrid inner method has no hierarchy");
  }
}

IterationTrace hybrid_solve(const CsrMatrix& a, const Vector& b, const Corrector* corrector,
                            const HybridConfig& cfg, const std::optional<Vector>& reference) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(b.size());
  if (a.rows() != n || a.cols() != n) throw DimensionError("hybrid_solve: A and b sizes differ");
  if (corrector != nullptr && corrector->size() != n)
    throw DimensionError("hybrid_solve: corrector acts on vectors of length " +
                         std::to_string(corrector->size()) + " but the system has " + std::to_string(n));
  if (reference && static_cast<std::size_t>(reference->size()) != n)
    throw DimensionError("hybrid_solve: reference solution has the wrong length");
  if (cfg.keep_error_vectors && !reference)
    throw std::invalid_argument("hybrid_solve: error vectors need a reference solution");
  const auto* mg = std::get_if<std::shared_ptr<const MgHierarchy>>(&cfg.inner);
  if (mg && (*mg)->fine_operator().rows() != n)
    throw DimensionError("hybrid_solve: multigrid hierarchy does not match the system");

  IterationTrace trace;
  const auto start = Clock::now();
  double corr_ms = 0.0;

  Vector mu = Vector::Zero(b.size());
  if (corrector != nullptr && cfg.use_initial_guess) {
    const auto t0 = Clock::now();
    mu = corrector->initial_guess(b);
    corr_ms += ms_since(t0);
    if (static_cast<std::size_t>(mu.size()) != n)
      throw DimensionError("hybrid_solve: initial guess has the wrong length");
  }
  Vector r = residual(a, b, mu);

  auto record = [&](std::size_t step, StepKind kind) {
    TraceEntry e{step, kind, norm_l2(r), std::nullopt, ms_since(start)};
    if (reference) {
      Vector err = *reference - mu;
      e.error_l2 = norm_l2(err);
      if (cfg.keep_error_vectors) trace.error_vectors.push_back(std::move(err));
    }
    trace.entries.push_back(e);
  };
  record(0, StepKind::Initial);

  const double r0 = cfg.stop.measure(r);
  trace.status = SolveStatus::MaxIter;
  if (!std::isfinite(r0)) {
    trace.status = SolveStatus::Diverged;
  } else if (r0 <= cfg.stop.tol) {
    trace.status = SolveStatus::Converged;
  } else {
    for (std::size_t m = 1; m <= cfg.stop.max_iter; ++m) {
      StepKind kind;
      if (corrector != nullptr && m % cfg.M == 0) {
        const auto t0 = Clock::now();
        mu += corrector->correct(r);
        corr_ms += ms_since(t0);
        kind = StepKind::Correct;
      } else if (mg) {
        (*mg)->vcycle(b, mu);
        kind = StepKind::VCycle;
      } else {
        smoother_step(std::get<SmootherKind>(cfg.inner), a, b, mu, r);
        kind = StepKind::Smooth;
      }
      r = residual(a, b, mu);
      record(m, kind);
      trace.iterations = m;
      const double rn = cfg.stop.measure(r);
      if (!std::isfinite(rn) || rn > kDivergenceFactor * r0) {
        trace.status = SolveStatus::Diverged;
        break;
      }
      if (rn <= cfg.stop.tol) {
        trace.status = SolveStatus::Converged;
        break;
      }
    }
  }
  trace.solution = std::move(mu);
  trace.total_time_ms = ms_since(start);
  trace.corrector_time_ms = corr_ms;
  return trace;
}

SweepResult sweep_M(const CsrMatrix& a, const Vector& b, const Corrector& corrector,
                    const std::vector<std::size_t>& M_values, const HybridConfig& cfg_template,
                    bool run_plain) {
  if (M_values.empty()) throw std::invalid_argument("sweep_M: no M values given");
  SweepResult out;
  if (run_plain) out.plain = hybrid_solve(a, b, nullptr, cfg_template);
  for (std::size_t M : M_values) {
    HybridConfig cfg = cfg_template;
    cfg.M = M;
    const IterationTrace tr = hybrid_solve(a, b, &corrector, cfg);
    SweepRow row;
    row.M = M;
    row.iterations = tr.iterations;
    row.time_s = tr.total_time_ms / 1000.0;
    row.status = tr.status;
    if (out.plain && tr.status == SolveStatus::Converged) {
      row.speedup = tr.total_time_ms > 0.0 ? out.plain->total_time_ms / tr.total_time_ms : 0.0;
      row.iteration_ratio =
          tr.iterations > 0 ? static_cast<double>(out.plain->iterations) / static_cast<double>(tr.iterations) : 0.0;
    }
    out.rows.push_back(row);
  }
  return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& os) {
  os << "M,iterations,time_s,status,speedup\n";
  if (sweep.plain)
    os << "plain," << sweep.plain->iterations << ',' << fmt("%.6f", sweep.plain->total_time_ms / 1000.0)
       << ',' << to_string(sweep.plain->status) << ",1\n";
  for (const SweepRow& r : sweep.rows) {
    const bool div = r.status == SolveStatus::Diverged;
    os << r.M << ',' << (div ? std::string("div.") : std::to_string(r.iterations)) << ','
       << fmt("%.6f", r.time_s) << ',' << to_string(r.status) << ',';
    if (div)
      os << "div.";
    else if (r.speedup > 0.0)
      os << fmt("%.4f", r.speedup);
    os << '\n';
  }
}

double empirical_rate(const IterationTrace& trace, std::size_t window) {
  if (window == 0) throw std::invalid_argument("empirical_rate: window must be positive");
  if (trace.entries.size() < window + 1)
    throw std::invalid_argument("empirical_rate: trace has " + std::to_string(trace.entries.size()) +
                                " entries, need at least " + std::to_string(window + 1));
  const double last = trace.entries.back().residual_l2;
  const double first = trace.entries[trace.entries.size() - 1 - window].residual_l2;
  return std::pow(last / first, 1.0 / static_cast<double>(window));
}

double period_contraction(const IterationTrace& trace, std::size_t periods) {
  std::vector<double> at_correct;
  for (const auto& e : trace.entries)
    if (e.kind == StepKind::Correct) at_correct.push_back(e.residual_l2);
  if (periods == 0 || at_correct.size() < periods + 1)
    throw std::invalid_argument("period_contraction: need at least " + std::to_string(periods + 1) +
                                " corrector steps");
  const double last = at_correct.back();
  const double first = at_correct[at_correct.size() - 1 - periods];
  return std::pow(last / first, 1.0 / static_cast<double>(periods));
}

}  // namespace hybrid
