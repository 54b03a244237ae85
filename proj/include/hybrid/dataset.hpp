/// @file dataset.hpp
/// @brief Operator-learning datasets: GP inputs, FEM targets, container I/O.

#pragma once

#include "hybrid/container.hpp"
#include "hybrid/fem.hpp"
#include "hybrid/gp_field.hpp"
#include "hybrid/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybrid {

/// Records are stored row-wise: row r of k_samples, f_samples and targets
/// belongs to record r. Every record shares the sensor and query lists.
struct Dataset {
  int dim = 1;
  std::vector<Point> k_sensors;
  std::vector<Point> f_sensors;
  std::vector<Point> query_points;
  Matrix k_samples;
  Matrix f_samples;
  Matrix targets;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const { return static_cast<std::size_t>(targets.rows()); }
  /// Throws DimensionError when record widths disagree with the lists.
  void validate() const;
  /// Records [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
};

Container dataset_to_container(const Dataset& d);
Dataset dataset_from_container(const Container& c);
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

struct DatasetConfig {
  int dim = 1;
  /// Interior nodes per axis of the grid the targets are solved on.
  std::size_t fine_n = 255;
  GpSpec gp_k = GpSpec::rbf(1.0, 0.2, 0.1);
  GpSpec gp_f = GpSpec::rbf(0.0, 1.0, 0.1);
  /// Boundary data for 2-d inhomogeneous problems (sampled along t).
  std::optional<GpSpec> gp_g;
  std::size_t count = 0;
  std::vector<Point> sensors;
  std::vector<Point> query_points;
  std::uint64_t seed = 0;
  /// Coefficient samples below this value are raised to it.
  double k_floor = 0.05;
  double solve_tol = 1e-10;
  std::size_t max_cycles = 200;
  /// Drop records whose solve fails instead of aborting.
  bool skip_failures = false;

  void validate() const;
};

struct DatasetReport {
  std::size_t generated = 0;
  std::size_t skipped = 0;
  /// Records in which at least one coefficient value was clamped.
  std::size_t clamped_records = 0;
};

Dataset generate_dataset(const DatasetConfig& cfg, DatasetReport* report = nullptr);

/// Solves -div(k grad u) = f with u = g on the boundary (g = 0 when absent)
/// by multigrid to the given residual tolerance and returns u on every node.
Vector solve_fem(const StructuredGrid& grid, const ScalarField& k, const ScalarField& f,
                 const BoundaryField* g = nullptr, double tol = 1e-10,
                 std::size_t max_cycles = 200);

/// Input samples of the forcing branch: f at interior sensors and, when g is
/// given, g(t) at sensors on the boundary.
Vector forcing_samples(const std::vector<Point>& sensors, const ScalarField& f,
                       const BoundaryField* g = nullptr);

/// True when p lies on the boundary of the unit interval / square.
bool on_boundary(int dim, const Point& p);

}  // namespace hybrid
