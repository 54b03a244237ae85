/// @file gp_field.cpp

#include "hybrid/gp_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybrid {

namespace {

Vector standard_normal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

Matrix correlation(const GpSpec& spec, const std::vector<Point>& points) {
  GpSpec unit = spec;
  unit.std = 1.0;
  return covariance(unit, points);
}

Matrix factor_or_explain(const Matrix& corr, double jitter) {
  try {
    return cholesky(corr, jitter);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("GP covariance factorization failed (") + e.what() +
                         "); try a larger jitter");
  }
}

}  // namespace

GpSpec GpSpec::rbf(double mean, double std, double length_scale, std::uint64_t seed) {
  GpSpec s;
  s.kernel = Kernel::Rbf;
  s.mean = mean;
  s.std = std;
  s.length_scale = length_scale;
  s.seed = seed;
  return s;
}

GpSpec GpSpec::exp_sine_squared(double mean, double std, double length_scale, double period,
                                std::uint64_t seed) {
  GpSpec s = rbf(mean, std, length_scale, seed);
  s.kernel = Kernel::ExpSineSquared;
  s.period = period;
  return s;
}

void GpSpec::validate() const {
  if (!(std > 0.0) || !std::isfinite(std)) throw std::invalid_argument("GP spec: std must be > 0");
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw std::invalid_argument("GP spec: length_scale must be > 0");
  if (kernel == Kernel::ExpSineSquared && (!(period > 0.0) || !std::isfinite(period)))
    throw std::invalid_argument("GP spec: period must be > 0");
  if (!std::isfinite(mean)) throw std::invalid_argument("GP spec: mean must be finite");
}

std::string to_string(GpSpec::Kernel kernel) {
  return kernel == GpSpec::Kernel::Rbf ? "rbf" : "exp_sine_squared";
}

GpSpec::Kernel parse_kernel(const std::string& name) {
  if (name == "rbf") return GpSpec::Kernel::Rbf;
  if (name == "exp_sine_squared") return GpSpec::Kernel::ExpSineSquared;
  throw std::invalid_argument("unknown GP kernel '" + name + "'");
}

double kernel_value(const GpSpec& spec, const Point& a, const Point& b) {
  const double var = spec.std * spec.std;
  if (spec.kernel == GpSpec::Kernel::Rbf) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return var * std::exp(-(dx * dx + dy * dy) / (2.0 * spec.length_scale * spec.length_scale));
  }
  const double s = std::sin(std::numbers::pi * std::abs(a[0] - b[0]) / spec.period);
  return var * std::exp(-2.0 * s * s / (spec.length_scale * spec.length_scale));
}

Matrix covariance(const GpSpec& spec, const std::vector<Point>& points) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = kernel_value(spec, points[static_cast<std::size_t>(i)],
                           points[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v =
          kernel_value(spec, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GpSampler::GpSampler(const GpSpec& spec, std::vector<Point> points, double jitter)
    : spec_(spec), points_(std::move(points)) {
  spec_.validate();
  factor_ = factor_or_explain(correlation(spec_, points_), jitter);
}

Vector GpSampler::sample(std::mt19937_64& rng) const {
  const Vector w = factor_ * standard_normal(rng, factor_.rows());
  return (spec_.mean + spec_.std * w.array()).matrix();
}

Vector sample_field(const GpSpec& spec, const std::vector<Point>& points, double jitter) {
  std::mt19937_64 rng(spec.seed);
  return GpSampler(spec, points, jitter).sample(rng);
}

LatticeGpSampler::LatticeGpSampler(const GpSpec& spec, const StructuredGrid& lattice,
                                   double jitter)
    : spec_(spec), lattice_(lattice) {
  spec_.validate();
  if (lattice_.dim() == 2 && spec_.kernel != GpSpec::Kernel::Rbf)
    throw std::invalid_argument("LatticeGpSampler: 2-d lattices need a separable (RBF) kernel");
  std::vector<Point> pts;
  if (lattice_.dim() == 1) {
    for (std::size_t i = 0; i < lattice_.full_count(); ++i) pts.push_back(lattice_.full_point(i));
  } else {
    for (std::size_t i = 0; i < lattice_.nodes_per_axis(); ++i)
      pts.push_back({static_cast<double>(i) * lattice_.h(), 0.0});
  }
  axis_factor_ = factor_or_explain(correlation(spec_, pts), jitter);
}

Vector LatticeGpSampler::sample(std::mt19937_64& rng) const {
  Vector w;
  if (lattice_.dim() == 1) {
    w = axis_factor_ * standard_normal(rng, axis_factor_.rows());
  } else {
    const Eigen::Index m = axis_factor_.rows();
    const Vector z = standard_normal(rng, m * m);
    // Column-major reshape: entry (i, j) is node i + j*m, x fastest.
    const Eigen::Map<const Matrix> zm(z.data(), m, m);
    const Matrix wm = axis_factor_ * zm * axis_factor_.transpose();
    w = Eigen::Map<const Vector>(wm.data(), m * m);
  }
  return (spec_.mean + spec_.std * w.array()).matrix();
}

ClampReport positivity_guard(const Vector& samples, double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("positivity_guard: floor must be positive");
  ClampReport rep{samples, 0};
  for (Eigen::Index i = 0; i < rep.values.size(); ++i) {
    if (rep.values[i] < floor) {
      rep.values[i] = floor;
      ++rep.clamped;
    }
  }
  return rep;
}

}  // namespace hybrid
