/// @file fem.cpp
/// @brief Stiffness and load assembly, lumped projections and P1 interpolation.

#include "hybrid/fem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace hybrid {

namespace {

std::string format_point(const Point& p, int dim) {
  std::ostringstream os;
  os.precision(6);
  if (dim == 1)
    os << "x=" << p[0];
  else
    os << "(x,y)=(" << p[0] << "," << p[1] << ")";
  return os.str();
}

double checked_coefficient(const ScalarField& k, const Point& p, int dim) {
  const double v = k(p);
  if (!std::isfinite(v) || v <= 0.0)
    throw NumericalError("coefficient k must be finite and positive; got " + std::to_string(v) +
                         " at " + format_point(p, dim));
  return v;
}

double checked_source(const ScalarField& f, const Point& p, int dim) {
  const double v = f(p);
  if (!std::isfinite(v))
    throw NumericalError("source f is not finite at " + format_point(p, dim));
  return v;
}

// Right triangles of cell (ci, cj), as full-grid axis index triples.
using Vertex = std::pair<std::size_t, std::size_t>;
std::array<std::array<Vertex, 3>, 2> cell_triangles(std::size_t ci, std::size_t cj) {
  return {{{{{ci, cj}, {ci + 1, cj}, {ci + 1, cj + 1}}},
           {{{ci, cj}, {ci, cj + 1}, {ci + 1, cj + 1}}}}};
}

// Gradient-based P1 stiffness of a triangle (unit coefficient).
std::array<std::array<double, 3>, 3> triangle_stiffness(const std::array<Point, 3>& v) {
  const double x1 = v[0][0], y1 = v[0][1];
  const double x2 = v[1][0], y2 = v[1][1];
  const double x3 = v[2][0], y3 = v[2][1];
  const double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
  const double area = 0.5 * std::abs(det);
  const std::array<double, 3> bx{y2 - y3, y3 - y1, y1 - y2};
  const std::array<double, 3> by{x3 - x2, x1 - x3, x2 - x1};
  std::array<std::array<double, 3>, 3> k{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) k[a][b] = (bx[a] * bx[b] + by[a] * by[b]) / (4.0 * area);
  return k;
}

// Full-grid stiffness contributions for every triangle, as triplets over full
// indices. Rows/cols outside keep are dropped by the caller.
std::vector<Triplet> full_stiffness_triplets_2d(const StructuredGrid& grid, const ScalarField& k) {
  const std::size_t m = grid.n() + 1;
  const double h = grid.h();
  std::vector<Triplet> trip;
  trip.reserve(m * m * 18);
  for (std::size_t cj = 0; cj < m; ++cj) {
    for (std::size_t ci = 0; ci < m; ++ci) {
      for (const auto& tri : cell_triangles(ci, cj)) {
        // The P1 stiffness in 2-d is scale invariant, so integer index
        // coordinates give exact stencil values.
        std::array<Point, 3> pts;
        std::array<std::size_t, 3> idx;
        for (int a = 0; a < 3; ++a) {
          pts[a] = {static_cast<double>(tri[a].first), static_cast<double>(tri[a].second)};
          idx[a] = grid.full_index(tri[a].first, tri[a].second);
        }
        const Point centroid{(pts[0][0] + pts[1][0] + pts[2][0]) / 3.0 * h,
                             (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0 * h};
        const double kc = checked_coefficient(k, centroid, 2);
        const auto local = triangle_stiffness(pts);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (local[a][b] != 0.0) trip.push_back({idx[a], idx[b], kc * local[a][b]});
      }
    }
  }
  return trip;
}

}  // namespace

StructuredGrid::StructuredGrid(int dim, std::size_t n)
    : dim_(dim), n_(n), h_(1.0 / static_cast<double>(n + 1)) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("StructuredGrid: dim must be 1 or 2");
  if (n < 1) throw std::invalid_argument("StructuredGrid: need at least one interior node");
}

std::size_t StructuredGrid::interior_count() const { return dim_ == 1 ? n_ : n_ * n_; }

std::size_t StructuredGrid::full_count() const {
  const std::size_t m = n_ + 2;
  return dim_ == 1 ? m : m * m;
}

std::size_t StructuredGrid::interior_index(std::size_t i, std::size_t j) const {
  if (dim_ == 1) return i - 1;
  return (j - 1) * n_ + (i - 1);
}

std::size_t StructuredGrid::full_index(std::size_t i, std::size_t j) const {
  if (dim_ == 1) return i;
  return j * (n_ + 2) + i;
}

Point StructuredGrid::interior_point(std::size_t idx) const {
  if (dim_ == 1) return {static_cast<double>(idx + 1) * h_, 0.0};
  return {static_cast<double>(idx % n_ + 1) * h_, static_cast<double>(idx / n_ + 1) * h_};
}

Point StructuredGrid::full_point(std::size_t idx) const {
  const auto [i, j] = full_axes(idx);
  return {static_cast<double>(i) * h_, dim_ == 1 ? 0.0 : static_cast<double>(j) * h_};
}

std::pair<std::size_t, std::size_t> StructuredGrid::full_axes(std::size_t idx) const {
  if (dim_ == 1) return {idx, 0};
  return {idx % (n_ + 2), idx / (n_ + 2)};
}

bool StructuredGrid::is_boundary(std::size_t full_idx) const {
  const auto [i, j] = full_axes(full_idx);
  if (i == 0 || i == n_ + 1) return true;
  if (dim_ == 2 && (j == 0 || j == n_ + 1)) return true;
  return false;
}

std::size_t StructuredGrid::interior_to_full(std::size_t idx) const {
  if (dim_ == 1) return idx + 1;
  return full_index(idx % n_ + 1, idx / n_ + 1);
}

double StructuredGrid::hat_integral(std::size_t full_idx) const {
  const auto [i, j] = full_axes(full_idx);
  const std::size_t last = n_ + 1;
  if (dim_ == 1) {
    const int elements = (i > 0 ? 1 : 0) + (i < last ? 1 : 0);
    return 0.5 * h_ * elements;
  }
  // Triangles touching node (i,j) from the four surrounding cells.
  int count = 0;
  if (i < last && j < last) count += 2;
  if (i > 0 && j < last) count += 1;
  if (i < last && j > 0) count += 1;
  if (i > 0 && j > 0) count += 2;
  return static_cast<double>(count) * h_ * h_ / 6.0;
}

double boundary_parameter(const Point& p) {
  const double x = p[0];
  const double y = p[1];
  constexpr double tol = 1e-12;
  if (std::abs(y) <= tol) return x >= 1.0 - tol ? 1.0 : std::max(x, 0.0);
  if (std::abs(x - 1.0) <= tol) return 1.0 + y;
  if (std::abs(y - 1.0) <= tol) return 2.0 + (1.0 - x);
  if (std::abs(x) <= tol) return 3.0 + (1.0 - y);
  throw std::invalid_argument("boundary_parameter: point is not on the boundary");
}

GridFunction::GridFunction(StructuredGrid g, Vector v, bool with_boundary)
    : grid(g), values(std::move(v)), includes_boundary(with_boundary) {
  const std::size_t expected = with_boundary ? grid.full_count() : grid.interior_count();
  if (static_cast<std::size_t>(values.size()) != expected)
    throw DimensionError("GridFunction: expected " + std::to_string(expected) + " values, got " +
                         std::to_string(values.size()));
}

PiecewiseLinearFn::PiecewiseLinearFn(StructuredGrid grid, Vector full_values)
    : grid_(grid), values_(std::move(full_values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.full_count())
    throw DimensionError("PiecewiseLinearFn: nodal vector must cover the boundary ring");
}

PiecewiseLinearFn PiecewiseLinearFn::from_interior(const StructuredGrid& grid,
                                                   const Vector& interior, PaddingMode mode) {
  if (static_cast<std::size_t>(interior.size()) != grid.interior_count())
    throw DimensionError("PiecewiseLinearFn::from_interior: wrong interior length");
  Vector full = Vector::Zero(static_cast<Eigen::Index>(grid.full_count()));
  const std::size_t n = grid.n();
  for (std::size_t idx = 0; idx < grid.interior_count(); ++idx)
    full[static_cast<Eigen::Index>(grid.interior_to_full(idx))] =
        interior[static_cast<Eigen::Index>(idx)];
  if (mode == PaddingMode::Replicate) {
    // The nearest interior node of a boundary node is its clamped index; it
    // is unique on a uniform grid, so no tie-breaking is needed.
    for (std::size_t f = 0; f < grid.full_count(); ++f) {
      if (!grid.is_boundary(f)) continue;
      const auto [i, j] = grid.full_axes(f);
      const std::size_t ci = std::clamp<std::size_t>(i, 1, n);
      const std::size_t cj = grid.dim() == 1 ? 0 : std::clamp<std::size_t>(j, 1, n);
      full[static_cast<Eigen::Index>(f)] =
          full[static_cast<Eigen::Index>(grid.full_index(ci, cj))];
    }
  }
  return PiecewiseLinearFn(grid, std::move(full));
}

double PiecewiseLinearFn::operator()(const Point& p) const {
  constexpr double tol = 1e-12;
  const double h = grid_.h();
  const std::size_t cells = grid_.n() + 1;
  auto locate = [&](double c) -> std::pair<std::size_t, double> {
    if (!(c >= -tol && c <= 1.0 + tol))
      throw std::out_of_range("PiecewiseLinearFn: evaluation point outside the closed domain");
    double s = std::clamp(c, 0.0, 1.0) / h;
    // Snap coordinates that are nodes up to rounding so nodal values are
    // reproduced exactly.
    const double r = std::round(s);
    if (std::abs(s - r) < 1e-9) s = r;
    auto cell = static_cast<std::size_t>(std::floor(s));
    if (cell >= cells) cell = cells - 1;
    return {cell, s - static_cast<double>(cell)};
  };
  const auto [ci, sx] = locate(p[0]);
  if (grid_.dim() == 1) {
    const double v0 = values_[static_cast<Eigen::Index>(ci)];
    const double v1 = values_[static_cast<Eigen::Index>(ci + 1)];
    return (1.0 - sx) * v0 + sx * v1;
  }
  const auto [cj, sy] = locate(p[1]);
  auto val = [&](std::size_t i, std::size_t j) {
    return values_[static_cast<Eigen::Index>(grid_.full_index(i, j))];
  };
  const double v00 = val(ci, cj);
  const double v10 = val(ci + 1, cj);
  const double v01 = val(ci, cj + 1);
  const double v11 = val(ci + 1, cj + 1);
  if (sx >= sy) return (1.0 - sx) * v00 + (sx - sy) * v10 + sy * v11;
  return (1.0 - sy) * v00 + (sy - sx) * v01 + sx * v11;
}

CsrMatrix assemble_stiffness_1d(const StructuredGrid& grid, const ScalarField& k) {
  if (grid.dim() != 1) throw std::invalid_argument("assemble_stiffness_1d: grid must be 1-d");
  const std::size_t n = grid.n();
  const double h = grid.h();
  std::vector<double> ke(n + 1);
  for (std::size_t e = 0; e <= n; ++e)
    ke[e] = checked_coefficient(k, {(static_cast<double>(e) + 0.5) * h, 0.0}, 1);
  std::vector<Triplet> trip;
  trip.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    // Interior node i+1 touches elements i and i+1.
    if (i > 0) trip.push_back({i, i - 1, -ke[i] / h});
    trip.push_back({i, i, (ke[i] + ke[i + 1]) / h});
    if (i + 1 < n) trip.push_back({i, i + 1, -ke[i + 1] / h});
  }
  return CsrMatrix::from_triplets(n, n, std::move(trip));
}

CsrMatrix assemble_stiffness_2d(const StructuredGrid& grid, const ScalarField& k) {
  if (grid.dim() != 2) throw std::invalid_argument("assemble_stiffness_2d: grid must be 2-d");
  const std::vector<Triplet> full = full_stiffness_triplets_2d(grid, k);
  // Map full indices to interior indices; boundary entries are dropped.
  std::vector<std::ptrdiff_t> to_interior(grid.full_count(), -1);
  for (std::size_t idx = 0; idx < grid.interior_count(); ++idx)
    to_interior[grid.interior_to_full(idx)] = static_cast<std::ptrdiff_t>(idx);
  std::vector<Triplet> trip;
  trip.reserve(full.size());
  for (const Triplet& t : full) {
    const auto r = to_interior[t.row];
    const auto c = to_interior[t.col];
    if (r >= 0 && c >= 0)
      trip.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), t.value});
  }
  const std::size_t ni = grid.interior_count();
  CsrMatrix a = CsrMatrix::from_triplets(ni, ni, std::move(trip));
  // Diagonal-neighbour couplings cancel exactly on right triangles; drop the
  // structural zeros so the stencil has five entries.
  std::vector<Triplet> clean;
  clean.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t kk = a.row_ptr()[i]; kk < a.row_ptr()[i + 1]; ++kk)
      if (a.values()[kk] != 0.0) clean.push_back({i, a.col_idx()[kk], a.values()[kk]});
  return CsrMatrix::from_triplets(ni, ni, std::move(clean));
}

CsrMatrix assemble_stiffness(const StructuredGrid& grid, const ScalarField& k) {
  return grid.dim() == 1 ? assemble_stiffness_1d(grid, k) : assemble_stiffness_2d(grid, k);
}

GridFunction assemble_load(const StructuredGrid& grid, const ScalarField& f) {
  const double h = grid.h();
  const std::size_t n = grid.n();
  Vector full = Vector::Zero(static_cast<Eigen::Index>(grid.full_count()));
  if (grid.dim() == 1) {
    const double g = 0.5 / std::sqrt(3.0);
    for (std::size_t e = 0; e <= n; ++e) {
      const double x0 = static_cast<double>(e) * h;
      for (double s : {0.5 - g, 0.5 + g}) {
        const double fv = checked_source(f, {x0 + s * h, 0.0}, 1);
        full[static_cast<Eigen::Index>(e)] += 0.5 * h * fv * (1.0 - s);
        full[static_cast<Eigen::Index>(e + 1)] += 0.5 * h * fv * s;
      }
    }
  } else {
    const double area = 0.5 * h * h;
    constexpr std::array<std::array<double, 3>, 3> bary{
        {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
         {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
         {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}};
    for (std::size_t cj = 0; cj <= n; ++cj) {
      for (std::size_t ci = 0; ci <= n; ++ci) {
        for (const auto& tri : cell_triangles(ci, cj)) {
          for (const auto& lam : bary) {
            Point q{0.0, 0.0};
            for (int a = 0; a < 3; ++a) {
              q[0] += lam[a] * static_cast<double>(tri[a].first) * h;
              q[1] += lam[a] * static_cast<double>(tri[a].second) * h;
            }
            const double fv = checked_source(f, q, 2);
            for (int a = 0; a < 3; ++a)
              full[static_cast<Eigen::Index>(grid.full_index(tri[a].first, tri[a].second))] +=
                  area / 3.0 * fv * lam[a];
          }
        }
      }
    }
  }
  return GridFunction(grid, restrict_to_interior(grid, full), false);
}

PiecewiseLinearFn residual_to_function(const StructuredGrid& grid, const Vector& r,
                                       PaddingMode mode) {
  if (static_cast<std::size_t>(r.size()) != grid.interior_count())
    throw DimensionError("residual_to_function: residual must be interior-only");
  Vector beta(r.size());
  for (std::size_t idx = 0; idx < grid.interior_count(); ++idx)
    beta[static_cast<Eigen::Index>(idx)] =
        r[static_cast<Eigen::Index>(idx)] / grid.hat_integral(grid.interior_to_full(idx));
  return PiecewiseLinearFn::from_interior(grid, beta, mode);
}

PiecewiseLinearFn residual_to_function(const StructuredGrid& grid, const GridFunction& r,
                                       PaddingMode mode) {
  if (r.includes_boundary)
    throw DimensionError("residual_to_function: residual must be interior-only");
  return residual_to_function(grid, r.values, mode);
}

GridFunction interpolate_at_nodes(const ScalarField& u, const StructuredGrid& grid,
                                  bool include_boundary) {
  const std::size_t count = include_boundary ? grid.full_count() : grid.interior_count();
  Vector v(static_cast<Eigen::Index>(count));
  for (std::size_t idx = 0; idx < count; ++idx) {
    const Point p = include_boundary ? grid.full_point(idx) : grid.interior_point(idx);
    const double val = u(p);
    if (!std::isfinite(val))
      throw NumericalError("interpolate_at_nodes: non-finite value at node " + std::to_string(idx));
    v[static_cast<Eigen::Index>(idx)] = val;
  }
  return GridFunction(grid, std::move(v), include_boundary);
}

AugmentedSystem assemble_augmented_2d(const StructuredGrid& grid, const ScalarField& k,
                                      const ScalarField& f, const BoundaryField& g) {
  if (grid.dim() != 2) throw std::invalid_argument("assemble_augmented_2d: grid must be 2-d");
  const std::size_t nf = grid.full_count();
  std::vector<Triplet> trip;
  for (const Triplet& t : full_stiffness_triplets_2d(grid, k))
    if (!grid.is_boundary(t.row)) trip.push_back(t);
  for (std::size_t idx = 0; idx < nf; ++idx)
    if (grid.is_boundary(idx)) trip.push_back({idx, idx, 1.0});
  CsrMatrix a = CsrMatrix::from_triplets(nf, nf, std::move(trip));
  std::vector<Triplet> clean;
  clean.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t kk = a.row_ptr()[i]; kk < a.row_ptr()[i + 1]; ++kk)
      if (a.values()[kk] != 0.0) clean.push_back({i, a.col_idx()[kk], a.values()[kk]});
  a = CsrMatrix::from_triplets(nf, nf, std::move(clean));

  const GridFunction load = assemble_load(grid, f);
  Vector b = extend_to_full(grid, load.values);
  for (std::size_t idx = 0; idx < nf; ++idx) {
    if (!grid.is_boundary(idx)) continue;
    const double gv = g(boundary_parameter(grid.full_point(idx)));
    if (!std::isfinite(gv))
      throw NumericalError("assemble_augmented_2d: boundary data not finite at node " +
                           std::to_string(idx));
    b[static_cast<Eigen::Index>(idx)] = gv;
  }
  return {std::move(a), GridFunction(grid, std::move(b), true)};
}

Vector restrict_to_interior(const StructuredGrid& grid, const Vector& full) {
  if (static_cast<std::size_t>(full.size()) != grid.full_count())
    throw DimensionError("restrict_to_interior: expected a full-grid vector");
  Vector v(static_cast<Eigen::Index>(grid.interior_count()));
  for (std::size_t idx = 0; idx < grid.interior_count(); ++idx)
    v[static_cast<Eigen::Index>(idx)] = full[static_cast<Eigen::Index>(grid.interior_to_full(idx))];
  return v;
}

Vector extend_to_full(const StructuredGrid& grid, const Vector& interior,
                      const Vector* boundary_source) {
  if (static_cast<std::size_t>(interior.size()) != grid.interior_count())
    throw DimensionError("extend_to_full: expected an interior vector");
  Vector full = boundary_source ? *boundary_source
                                : Vector::Zero(static_cast<Eigen::Index>(grid.full_count()));
  if (static_cast<std::size_t>(full.size()) != grid.full_count())
    throw DimensionError("extend_to_full: boundary source has wrong length");
  for (std::size_t idx = 0; idx < grid.interior_count(); ++idx)
    full[static_cast<Eigen::Index>(grid.interior_to_full(idx))] = interior[static_cast<Eigen::Index>(idx)];
  return full;
}

namespace {

class BoundaryInterpolant {
 public:
  BoundaryInterpolant(std::vector<double> t, std::vector<double> v) {
    std::vector<std::size_t> order(t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    for (std::size_t i : order) {
      t_.push_back(t[i]);
      v_.push_back(v[i]);
    }
    t_.push_back(t_.front() + 4.0);
    v_.push_back(v_.front());
  }

  double operator()(double t) const {
    double s = std::fmod(t - t_.front(), 4.0);
    if (s < 0.0) s += 4.0;
    s += t_.front();
    const auto it = std::upper_bound(t_.begin(), t_.end(), s);
    const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - t_.begin()), t_.size() - 1);
    const std::size_t lo = hi - 1;
    const double w = (s - t_[lo]) / (t_[hi] - t_[lo]);
    return (1.0 - w) * v_[lo] + w * v_[hi];
  }

 private:
  std::vector<double> t_;
  std::vector<double> v_;
};

}  // namespace

BoundaryField periodic_boundary_interpolant(std::vector<double> t, std::vector<double> v) {
  if (t.size() != v.size() || t.empty())
    throw std::invalid_argument("periodic_boundary_interpolant: need matching, non-empty t and values");
  auto f = std::make_shared<const BoundaryInterpolant>(std::move(t), std::move(v));
  return [f](double s) { return (*f)(s); };
}

}  // namespace hybrid
