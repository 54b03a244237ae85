/// @file gp_field.hpp
/// @brief Gaussian-process sampling of coefficient, source and boundary
/// fields.
///
/// Samples are drawn as mean + std * (L z) where L is the Cholesky factor of
/// the unit-variance correlation matrix and z comes from a seeded
/// std::mt19937_64. Scaling after the factorization makes the affine
/// pushforward (mean, std) exact to the bit.

#pragma once

#include "hybrid/fem.hpp"
#include "hybrid/linalg.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hybrid {

struct GpSpec {
  enum class Kernel { Rbf, ExpSineSquared };

  Kernel kernel = Kernel::Rbf;
  double mean = 0.0;
  double std = 1.0;
  double length_scale = 0.1;
  /// Only used by ExpSineSquared.
  double period = 4.0;
  std::uint64_t seed = 0;

  static GpSpec rbf(double mean, double std, double length_scale, std::uint64_t seed = 0);
  static GpSpec exp_sine_squared(double mean, double std, double length_scale, double period,
                                 std::uint64_t seed = 0);

  void validate() const;
};

std::string to_string(GpSpec::Kernel kernel);
GpSpec::Kernel parse_kernel(const std::string& name);

/// Kernel value between two points. ExpSineSquared uses |x0 - y0| as the
/// 1-d periodic distance (the boundary coordinate t).
double kernel_value(const GpSpec& spec, const Point& a, const Point& b);

/// Dense covariance std^2 * k(x_i, x_j).
Matrix covariance(const GpSpec& spec, const std::vector<Point>& points);

/// Reusable sampler: factors the correlation matrix once and draws any
/// number of samples from a generator.
class GpSampler {
 public:
  /// jitter is relative to unit variance, so the effective diagonal shift on
  /// the covariance is jitter * std^2.
  GpSampler(const GpSpec& spec, std::vector<Point> points, double jitter = 1e-8);

  Vector sample(std::mt19937_64& rng) const;
  const std::vector<Point>& points() const { return points_; }
  const GpSpec& spec() const { return spec_; }

 private:
  GpSpec spec_;
  std::vector<Point> points_;
  Matrix factor_;
};

/// One draw at the given points using spec.seed.
Vector sample_field(const GpSpec& spec, const std::vector<Point>& points, double jitter = 1e-8);

/// Separable sampler for RBF fields on the full node lattice of a 2-d grid:
/// the correlation is the Kronecker product of two 1-d factors, which keeps
/// the cost at O(m^3) for m nodes per axis. Falls back to dense sampling on
/// 1-d grids.
class LatticeGpSampler {
 public:
  LatticeGpSampler(const GpSpec& spec, const StructuredGrid& lattice, double jitter = 1e-8);

  /// Values on every node of the lattice (boundary included), lexicographic.
  Vector sample(std::mt19937_64& rng) const;
  const StructuredGrid& lattice() const { return lattice_; }

 private:
  GpSpec spec_;
  StructuredGrid lattice_;
  Matrix axis_factor_;
};

struct ClampReport {
  Vector values;
  std::size_t clamped = 0;
};

/// Raises every entry below floor to floor.
ClampReport positivity_guard(const Vector& samples, double floor);

}  // namespace hybrid
