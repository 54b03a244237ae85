/// @file trace.cpp

#include "hybrid/trace.hpp"

#include <cstdio>
#include <ostream>

namespace hybrid {

std::string to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Initial: return "initial";
    case StepKind::Smooth: return "smooth";
    case StepKind::Correct: return "correct";
    case StepKind::VCycle: return "vcycle";
  }
  return "unknown";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

std::vector<double> IterationTrace::residuals() const {
  std::vector<double> r;
  r.reserve(entries.size());
  for (const auto& e : entries) r.push_back(e.residual_l2);
  return r;
}

void write_trace_csv(const IterationTrace& trace, std::ostream& os) {
  os << "step,kind,residual_l2,error_l2,time_ms\n";
  char buf[64];
  for (const auto& e : trace.entries) {
    os << e.step << ',' << to_string(e.kind) << ',';
    std::snprintf(buf, sizeof buf, "%.17g", e.residual_l2);
    os << buf << ',';
    if (e.error_l2) {
      std::snprintf(buf, sizeof buf, "%.17g", *e.error_l2);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.6f", e.time_ms);
    os << ',' << buf << '\n';
  }
}

}  // namespace hybrid
