/// @file smoothers.hpp
/// @brief Classical stationary iterations mu <- mu + B (b - A mu).

#pragma once

#include "hybrid/linalg.hpp"
#include "hybrid/trace.hpp"

#include <optional>

namespace hybrid {

struct SmootherKind {
  enum class Type { Richardson, Jacobi, GaussSeidel, Sor };

  Type type = Type::GaussSeidel;
  double omega = 1.0;

  static SmootherKind richardson(double omega) { return {Type::Richardson, omega}; }
  static SmootherKind jacobi(double omega) { return {Type::Jacobi, omega}; }
  static SmootherKind gauss_seidel() { return {Type::GaussSeidel, 1.0}; }
  static SmootherKind sor(double omega) { return {Type::Sor, omega}; }

  /// Throws std::invalid_argument for a non-finite or non-positive omega.
  void validate() const;
};

std::string to_string(const SmootherKind& kind);
/// Parses "richardson", "jacobi", "gs"/"gauss-seidel", "sor".
SmootherKind parse_smoother(const std::string& name, double omega);

enum class NormKind { L2, Linf };

struct StopRule {
  double tol = 1e-12;
  std::size_t max_iter = 100000;
  NormKind norm = NormKind::L2;

  void validate() const;
  double measure(const Vector& r) const;
};

/// Divergence threshold relative to the initial residual norm.
inline constexpr double kDivergenceFactor = 1e6;

/// One smoothing step, updating mu in place. Gauss-Seidel and SOR are single
/// forward lexicographic sweeps.
void smoother_step(const SmootherKind& kind, const CsrMatrix& a, const Vector& b, Vector& mu);

/// Same as smoother_step when the current residual b - A mu is already known
/// (saves one product for Richardson and Jacobi).
void smoother_step(const SmootherKind& kind, const CsrMatrix& a, const Vector& b, Vector& mu,
                   const Vector& current_residual);

/// Iterates until the stop rule is met, the iteration diverges, or max_iter
/// is reached. Divergence is reported through the status, never thrown.
IterationTrace solve_stationary(const SmootherKind& kind, const CsrMatrix& a, const Vector& b,
                                const Vector& mu0, const StopRule& stop,
                                const std::optional<Vector>& reference = std::nullopt);

}  // namespace hybrid
