/// @file fem.hpp
/// @brief P1 finite element discretization of -div(k grad u) = f on the unit
/// interval / unit square with uniform grids.
///
/// Node numbering is lexicographic with x varying fastest. "Interior" vectors
/// hold the n^dim unknowns of the homogeneous problem; "full" vectors hold
/// every node including the boundary ring, (n+2)^dim entries.
///
/// The square is split into right triangles along the (i,j)-(i+1,j+1)
/// diagonal, which keeps the k=1 stencil at {4, -1, -1, -1, -1} and makes
/// the triangulations of successive grid levels nested.

#pragma once

#include "hybrid/linalg.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <utility>

namespace hybrid {

using Point = std::array<double, 2>;
using ScalarField = std::function<double(const Point&)>;
/// Boundary data as a function of the anticlockwise boundary coordinate
/// t in [0, 4): bottom t=x, right t=1+y, top t=2+(1-x), left t=3+(1-y).
using BoundaryField = std::function<double(double)>;

enum class PaddingMode { Zero, Replicate };

class StructuredGrid {
 public:
  StructuredGrid() = default;
  StructuredGrid(int dim, std::size_t n);

  int dim() const { return dim_; }
  /// Interior nodes per axis.
  std::size_t n() const { return n_; }
  double h() const { return h_; }
  /// Nodes per axis including both boundary nodes.
  std::size_t nodes_per_axis() const { return n_ + 2; }

  std::size_t interior_count() const;
  std::size_t full_count() const;

  /// Lexicographic index of interior node with 1-based axis indices.
  std::size_t interior_index(std::size_t i, std::size_t j = 1) const;
  /// Lexicographic index of a full-grid node with 0-based axis indices.
  std::size_t full_index(std::size_t i, std::size_t j = 0) const;

  Point interior_point(std::size_t idx) const;
  Point full_point(std::size_t idx) const;

  /// Axis indices (0-based over the full grid) of a full node.
  std::pair<std::size_t, std::size_t> full_axes(std::size_t idx) const;
  bool is_boundary(std::size_t full_idx) const;
  /// Full-grid index of interior node idx.
  std::size_t interior_to_full(std::size_t idx) const;

  /// Exact integral of the hat function of full node idx over the domain.
  double hat_integral(std::size_t full_idx) const;

  bool operator==(const StructuredGrid&) const = default;

 private:
  int dim_ = 1;
  std::size_t n_ = 1;
  double h_ = 0.5;
};

/// Boundary coordinate t of a point on the boundary of the unit square.
double boundary_parameter(const Point& p);

/// Nodal values on a grid, either interior-only or including the boundary.
struct GridFunction {
  StructuredGrid grid;
  Vector values;
  bool includes_boundary = false;

  GridFunction() = default;
  GridFunction(StructuredGrid g, Vector v, bool with_boundary);
};

/// Continuous piecewise-linear function given by nodal values on every node
/// of a grid (boundary ring included).
class PiecewiseLinearFn {
 public:
  PiecewiseLinearFn() = default;
  PiecewiseLinearFn(StructuredGrid grid, Vector full_values);

  /// Builds from interior values with zero boundary.
  static PiecewiseLinearFn from_interior(const StructuredGrid& grid, const Vector& interior,
                                         PaddingMode mode = PaddingMode::Zero);

  const StructuredGrid& grid() const { return grid_; }
  const Vector& nodal_values() const { return values_; }

  /// P1 evaluation; throws std::out_of_range outside the closed domain.
  double operator()(const Point& p) const;
  double operator()(double x) const { return (*this)(Point{x, 0.0}); }

 private:
  StructuredGrid grid_;
  Vector values_;
};

/// 1-d stiffness matrix with k evaluated at element midpoints.
CsrMatrix assemble_stiffness_1d(const StructuredGrid& grid, const ScalarField& k);

/// 2-d stiffness matrix with k evaluated at triangle centroids.
CsrMatrix assemble_stiffness_2d(const StructuredGrid& grid, const ScalarField& k);

/// Dispatches on grid.dim().
CsrMatrix assemble_stiffness(const StructuredGrid& grid, const ScalarField& k);

/// Load vector b_i = int f phi_i (2-point Gauss per interval, 3-point rule
/// per triangle).
GridFunction assemble_load(const StructuredGrid& grid, const ScalarField& f);

/// Lumped residual function: beta_i = r_i / int phi_i, boundary ring filled
/// by the padding mode.
PiecewiseLinearFn residual_to_function(const StructuredGrid& grid, const GridFunction& r,
                                       PaddingMode mode = PaddingMode::Replicate);
PiecewiseLinearFn residual_to_function(const StructuredGrid& grid, const Vector& r,
                                       PaddingMode mode = PaddingMode::Replicate);

/// Samples u at the interior nodes (or every node when include_boundary).
GridFunction interpolate_at_nodes(const ScalarField& u, const StructuredGrid& grid,
                                  bool include_boundary = false);

struct AugmentedSystem {
  CsrMatrix a;
  GridFunction b;
};

/// 2-d system over every node: boundary rows are identity rows with the
/// boundary data on the right-hand side; interior rows carry the usual
/// stencil including couplings to boundary unknowns.
AugmentedSystem assemble_augmented_2d(const StructuredGrid& grid, const ScalarField& k,
                                      const ScalarField& f, const BoundaryField& g);

/// Periodic (period 4) piecewise-linear interpolation in the boundary
/// parameter t of values given at sample parameters t.
BoundaryField periodic_boundary_interpolant(std::vector<double> t, std::vector<double> v);

/// Splits a full-grid vector into its interior part.
Vector restrict_to_interior(const StructuredGrid& grid, const Vector& full);
/// Embeds interior values into a full-grid vector with the given boundary.
Vector extend_to_full(const StructuredGrid& grid, const Vector& interior,
                      const Vector* boundary_source = nullptr);

}  // namespace hybrid
