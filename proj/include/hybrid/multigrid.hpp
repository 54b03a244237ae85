/// @file multigrid.hpp
/// @brief Geometric multigrid V-cycles on the nested uniform grids.
///
/// Every level is re-discretized from the coefficient field. Transfers are
/// P1 interpolation and its transpose; with FEM-scaled operators this pair
/// reproduces the Galerkin coarse operator exactly for k = 1.

#pragma once

#include "hybrid/fem.hpp"
#include "hybrid/linalg.hpp"
#include "hybrid/smoothers.hpp"
#include "hybrid/trace.hpp"

#include <vector>

namespace hybrid {

struct MgLevel {
  StructuredGrid grid;
  CsrMatrix a;
  /// Interpolation from the next coarser level to this one; empty on the
  /// coarsest level.
  CsrMatrix prolongation;
  CsrMatrix restriction;
};

class MgHierarchy {
 public:
  MgHierarchy(std::vector<MgLevel> levels, std::size_t pre_sweeps, std::size_t post_sweeps);

  std::size_t num_levels() const { return levels_.size(); }
  const MgLevel& level(std::size_t l) const { return levels_.at(l); }
  const CsrMatrix& fine_operator() const { return levels_.front().a; }
  std::size_t pre_sweeps() const { return pre_; }
  std::size_t post_sweeps() const { return post_; }

  /// One V(pre, post) cycle on the finest level, updating mu in place.
  void vcycle(const Vector& b, Vector& mu) const;

 private:
  void cycle(std::size_t l, const Vector& b, Vector& mu) const;

  std::vector<MgLevel> levels_;
  std::size_t pre_;
  std::size_t post_;
  Matrix coarse_factor_;
};

/// P1 interpolation from the grid with (n+1)/2 - 1 interior nodes per axis.
CsrMatrix build_prolongation(const StructuredGrid& fine);

/// Builds `levels` grids starting at `grid`. Requires (n+1) divisible by
/// 2^(levels-1) and levels >= 2.
MgHierarchy build_hierarchy(const StructuredGrid& grid, const ScalarField& k, std::size_t levels,
                            std::size_t pre_sweeps = 2, std::size_t post_sweeps = 2);

/// Deepest admissible level count whose coarsest grid keeps at least
/// `min_coarse_n` interior nodes per axis.
std::size_t max_levels(const StructuredGrid& grid, std::size_t min_coarse_n = 1);

/// Free-function form of MgHierarchy::vcycle.
void vcycle(const MgHierarchy& h, const Vector& b, Vector& mu);

/// Repeats V-cycles until the stop rule holds (one cycle per step).
IterationTrace mg_solve(const MgHierarchy& h, const Vector& b, const Vector& mu0,
                        const StopRule& stop);

}  // namespace hybrid
