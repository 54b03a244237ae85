/// @file multigrid.cpp

#include "hybrid/multigrid.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hybrid {

CsrMatrix build_prolongation(const StructuredGrid& fine) {
  const std::size_t n = fine.n();
  if ((n + 1) % 2 != 0 || n < 3)
    throw std::invalid_argument("build_prolongation: fine grid has no coarse counterpart");
  const StructuredGrid coarse(fine.dim(), (n + 1) / 2 - 1);
  const std::size_t nc = coarse.n();
  auto coarse_index = [&](std::size_t ci, std::size_t cj) -> std::ptrdiff_t {
    if (ci < 1 || ci > nc) return -1;
    if (fine.dim() == 2 && (cj < 1 || cj > nc)) return -1;
    return static_cast<std::ptrdiff_t>(coarse.interior_index(ci, cj));
  };
  std::vector<Triplet> trip;
  auto add = [&](std::size_t row, std::ptrdiff_t col, double w) {
    if (col >= 0) trip.push_back({row, static_cast<std::size_t>(col), w});
  };
  if (fine.dim() == 1) {
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t row = fine.interior_index(i);
      if (i % 2 == 0) {
        add(row, coarse_index(i / 2, 1), 1.0);
      } else {
        add(row, coarse_index((i - 1) / 2, 1), 0.5);
        add(row, coarse_index((i + 1) / 2, 1), 0.5);
      }
    }
  } else {
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t row = fine.interior_index(i, j);
        const bool ie = i % 2 == 0;
        const bool je = j % 2 == 0;
        if (ie && je) {
          add(row, coarse_index(i / 2, j / 2), 1.0);
        } else if (!ie && je) {
          add(row, coarse_index((i - 1) / 2, j / 2), 0.5);
          add(row, coarse_index((i + 1) / 2, j / 2), 0.5);
        } else if (ie && !je) {
          add(row, coarse_index(i / 2, (j - 1) / 2), 0.5);
          add(row, coarse_index(i / 2, (j + 1) / 2), 0.5);
        } else {
          // Cell centre sits on the (i,j)-(i+1,j+1) diagonal edge.
          add(row, coarse_index((i - 1) / 2, (j - 1) / 2), 0.5);
          add(row, coarse_index((i + 1) / 2, (j + 1) / 2), 0.5);
        }
      }
    }
  }
  return CsrMatrix::from_triplets(fine.interior_count(), coarse.interior_count(), std::move(trip));
}

std::size_t max_levels(const StructuredGrid& grid, std::size_t min_coarse_n) {
  std::size_t levels = 1;
  std::size_t n = grid.n();
  while ((n + 1) % 2 == 0 && (n + 1) / 2 - 1 >= std::max<std::size_t>(min_coarse_n, 1)) {
    n = (n + 1) / 2 - 1;
    ++levels;
  }
  return levels;
}

MgHierarchy::MgHierarchy(std::vector<MgLevel> levels, std::size_t pre_sweeps,
                         std::size_t post_sweeps)
    : levels_(std::move(levels)), pre_(pre_sweeps), post_(post_sweeps) {
  if (levels_.empty()) throw std::invalid_argument("MgHierarchy: no levels");
  coarse_factor_ = cholesky(levels_.back().a.to_dense());
}

void MgHierarchy::vcycle(const Vector& b, Vector& mu) const {
  if (static_cast<std::size_t>(b.size()) != fine_operator().rows() || b.size() != mu.size())
    throw DimensionError("vcycle: vector lengths do not match the fine operator");
  cycle(0, b, mu);
}

void MgHierarchy::cycle(std::size_t l, const Vector& b, Vector& mu) const {
  const MgLevel& lev = levels_[l];
  if (l + 1 == levels_.size()) {
    mu = cholesky_solve(coarse_factor_, b);
    return;
  }
  const SmootherKind gs = SmootherKind::gauss_seidel();
  for (std::size_t s = 0; s < pre_; ++s) smoother_step(gs, lev.a, b, mu, b);
  const Vector r = residual(lev.a, b, mu);
  const Vector rc = spmv(lev.restriction, r);
  Vector ec = Vector::Zero(rc.size());
  cycle(l + 1, rc, ec);
  mu += spmv(lev.prolongation, ec);
  for (std::size_t s = 0; s < post_; ++s) smoother_step(gs, lev.a, b, mu, b);
}

MgHierarchy build_hierarchy(const StructuredGrid& grid, const ScalarField& k, std::size_t levels,
                            std::size_t pre_sweeps, std::size_t post_sweeps) {
  if (levels < 2) throw std::invalid_argument("build_hierarchy: need at least two levels");
  const std::size_t div = std::size_t{1} << (levels - 1);
  if ((grid.n() + 1) % div != 0 || (grid.n() + 1) / div < 2)
    throw std::invalid_argument("build_hierarchy: n+1 = " + std::to_string(grid.n() + 1) +
                                " is not divisible into " + std::to_string(levels) + " levels");
  std::vector<MgLevel> out;
  StructuredGrid g = grid;
  for (std::size_t l = 0; l < levels; ++l) {
    MgLevel lev;
    lev.grid = g;
    lev.a = assemble_stiffness(g, k);
    if (l + 1 < levels) {
      lev.prolongation = build_prolongation(g);
      lev.restriction = lev.prolongation.transpose();
      g = StructuredGrid(g.dim(), (g.n() + 1) / 2 - 1);
    }
    out.push_back(std::move(lev));
  }
  return MgHierarchy(std::move(out), pre_sweeps, post_sweeps);
}

void vcycle(const MgHierarchy& h, const Vector& b, Vector& mu) { h.vcycle(b, mu); }

IterationTrace mg_solve(const MgHierarchy& h, const Vector& b, const Vector& mu0,
                        const StopRule& stop) {
  using Clock = std::chrono::steady_clock;
  stop.validate();
  const auto start = Clock::now();
  auto ms = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); };
  IterationTrace trace;
  Vector mu = mu0;
  Vector r = residual(h.fine_operator(), b, mu);
  trace.entries.push_back({0, StepKind::Initial, norm_l2(r), std::nullopt, ms()});
  const double r0 = stop.measure(r);
  trace.status = r0 <= stop.tol ? SolveStatus::Converged : SolveStatus::MaxIter;
  for (std::size_t m = 1; trace.status != SolveStatus::Converged && m <= stop.max_iter; ++m) {
    h.vcycle(b, mu);
    r = residual(h.fine_operator(), b, mu);
    trace.entries.push_back({m, StepKind::VCycle, norm_l2(r), std::nullopt, ms()});
    trace.iterations = m;
    const double rn = stop.measure(r);
    if (!std::isfinite(rn) || rn > kDivergenceFactor * r0) {
      trace.status = SolveStatus::Diverged;
      break;
    }
    if (rn <= stop.tol) trace.status = SolveStatus::Converged;
  }
  trace.solution = std::move(mu);
  trace.total_time_ms = ms();
  return trace;
}

}  // namespace hybrid
