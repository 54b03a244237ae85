/// @file smoothers.cpp
/// @brief Richardson, Jacobi, Gauss-Seidel and SOR sweeps.

#include "hybrid/smoothers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hybrid {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_shapes(const CsrMatrix& a, const Vector& b, const Vector& mu) {
  if (a.rows() != a.cols()) throw DimensionError("smoother: matrix must be square");
  if (static_cast<std::size_t>(b.size()) != a.rows() ||
      static_cast<std::size_t>(mu.size()) != a.rows())
    throw DimensionError("smoother: vector lengths do not match the matrix");
}

// Forward sweep; omega = 1 is Gauss-Seidel.
void forward_sweep(const CsrMatrix& a, const Vector& b, Vector& mu, double omega) {
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double diag = 0.0;
    double sum = b[static_cast<Eigen::Index>(i)];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (ci[k] == i)
        diag = v[k];
      else
        sum -= v[k] * mu[static_cast<Eigen::Index>(ci[k])];
    }
    if (diag == 0.0)
      throw NumericalError("smoother: zero diagonal entry in row " + std::to_string(i));
    const double gs = sum / diag;
    auto& m = mu[static_cast<Eigen::Index>(i)];
    m = omega == 1.0 ? gs : m + omega * (gs - m);
  }
}

}  // namespace

void SmootherKind::validate() const {
  if (!std::isfinite(omega) || omega <= 0.0)
    throw std::invalid_argument("smoother: relaxation parameter must be finite and positive");
}

std::string to_string(const SmootherKind& kind) {
  switch (kind.type) {
    case SmootherKind::Type::Richardson: return "richardson";
    case SmootherKind::Type::Jacobi: return "jacobi";
    case SmootherKind::Type::GaussSeidel: return "gs";
    case SmootherKind::Type::Sor: return "sor";
  }
  return "unknown";
}

SmootherKind parse_smoother(const std::string& name, double omega) {
  SmootherKind k;
  if (name == "richardson")
    k = SmootherKind::richardson(omega);
  else if (name == "jacobi")
    k = SmootherKind::jacobi(omega);
  else if (name == "gs" || name == "gauss-seidel")
    k = SmootherKind::gauss_seidel();
  else if (name == "sor")
    k = SmootherKind::sor(omega);
  else
    throw std::invalid_argument("unknown smoother '" + name + "'");
  k.validate();
  return k;
}

void StopRule::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("stop rule: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("stop rule: max_iter must be at least 1");
}

double StopRule::measure(const Vector& r) const {
  return norm == NormKind::L2 ? norm_l2(r) : norm_linf(r);
}

void smoother_step(const SmootherKind& kind, const CsrMatrix& a, const Vector& b, Vector& mu,
                   const Vector& current_residual) {
  check_shapes(a, b, mu);
  switch (kind.type) {
    case SmootherKind::Type::Richardson:
      mu += kind.omega * current_residual;
      break;
    case SmootherKind::Type::Jacobi: {
      const Vector d = a.diagonal();
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0)
          throw NumericalError("smoother: zero diagonal entry in row " + std::to_string(i));
        mu[i] += kind.omega * current_residual[i] / d[i];
      }
      break;
    }
    case SmootherKind::Type::GaussSeidel:
      forward_sweep(a, b, mu, 1.0);
      break;
    case SmootherKind::Type::Sor:
      forward_sweep(a, b, mu, kind.omega);
      break;
  }
}

void smoother_step(const SmootherKind& kind, const CsrMatrix& a, const Vector& b, Vector& mu) {
  check_shapes(a, b, mu);
  if (kind.type == SmootherKind::Type::GaussSeidel || kind.type == SmootherKind::Type::Sor) {
    smoother_step(kind, a, b, mu, b);  // residual unused by sweeps
    return;
  }
  smoother_step(kind, a, b, mu, residual(a, b, mu));
}

IterationTrace solve_stationary(const SmootherKind& kind, const CsrMatrix& a, const Vector& b,
                                const Vector& mu0, const StopRule& stop,
                                const std::optional<Vector>& reference) {
  kind.validate();
  stop.validate();
  Vector mu = mu0;
  check_shapes(a, b, mu);
  const auto start = Clock::now();
  IterationTrace trace;
  Vector r = residual(a, b, mu);
  auto record = [&](std::size_t step, StepKind sk) {
    TraceEntry e{step, sk, norm_l2(r), std::nullopt, elapsed_ms(start)};
    if (reference) e.error_l2 = norm_l2(*reference - mu);
    trace.entries.push_back(e);
  };
  record(0, StepKind::Initial);
  const double r0 = stop.measure(r);
  trace.status = SolveStatus::MaxIter;
  if (r0 <= stop.tol) {
    trace.status = SolveStatus::Converged;
  } else {
    for (std::size_t m = 1; m <= stop.max_iter; ++m) {
      smoother_step(kind, a, b, mu, r);
      r = residual(a, b, mu);
      record(m, StepKind::Smooth);
      trace.iterations = m;
      const double rn = stop.measure(r);
      if (!std::isfinite(rn) || rn > kDivergenceFactor * r0) {
        trace.status = SolveStatus::Diverged;
        break;
      }
      if (rn <= stop.tol) {
        trace.status = SolveStatus::Converged;
        break;
      }
    }
  }
  trace.solution = std::move(mu);
  trace.total_time_ms = elapsed_ms(start);
  return trace;
}

}  // namespace hybrid
