/// @file test_gp_field.cpp
/// @brief Kernels, covariance, seeded sampling and the positivity guard.

#include <doctest.h>

#include "hybrid/gp_field.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hybrid;

namespace {

// Smallest pivot of a diagonally pivoted Cholesky. Elimination stops once
// the largest remaining pivot drops below rank_tol; the remaining Schur
// diagonal then counts as the final pivots.
double min_cholesky_pivot(Matrix a, double rank_tol = 1e-12) {
  const Eigen::Index n = a.rows();
  const double scale = a.diagonal().maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p;
    const double d = a.diagonal().tail(n - k).maxCoeff(&p);
    p += k;
    if (d <= rank_tol * scale) return a.diagonal().tail(n - k).minCoeff();
    a.row(k).swap(a.row(p));
    a.col(k).swap(a.col(p));
    const Vector l = a.col(k).tail(n - k - 1) / std::sqrt(d);
    a.bottomRightCorner(n - k - 1, n - k - 1) -= l * l.transpose();
  }
  return 0.0;
}

}  // namespace

TEST_CASE("kernel values") {
  const GpSpec k = GpSpec::rbf(1.0, 0.2, 0.1);
  CHECK(kernel_value(k, {0.3, 0.0}, {0.3, 0.0}) == doctest::Approx(0.04).epsilon(1e-15));
  const GpSpec u = GpSpec::rbf(0.0, 1.0, 0.1);
  CHECK(kernel_value(u, {0.2, 0.0}, {0.3, 0.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(std::exp(-0.5) == doctest::Approx(0.60653).epsilon(1e-5));
  // 2-d distance uses both coordinates.
  CHECK(kernel_value(u, {0.0, 0.0}, {0.06, 0.08}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  const GpSpec g = GpSpec::exp_sine_squared(0.0, 0.5, 0.7, 4.0);
  CHECK(kernel_value(g, {0.3, 0.0}, {4.3, 0.0}) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(kernel_value(g, {0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(kernel_value(g, {0.0, 0.0}, {3.0, 0.0})));
  const double s = std::sin(std::numbers::pi / 4.0);
  CHECK(kernel_value(g, {0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.25 * std::exp(-2.0 * s * s / 0.49)));
}

TEST_CASE("spec validation and kernel names") {
  CHECK_THROWS_AS(GpSpec::rbf(0, 0, 0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GpSpec::rbf(0, 1, -0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GpSpec::exp_sine_squared(0, 1, 1, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GpSpec::rbf(NAN, 1, 0.1).validate(), std::invalid_argument);
  CHECK(parse_kernel(to_string(GpSpec::Kernel::ExpSineSquared)) == GpSpec::Kernel::ExpSineSquared);
  CHECK(parse_kernel("rbf") == GpSpec::Kernel::Rbf);
  CHECK_THROWS_AS(parse_kernel("matern"), std::invalid_argument);
}

TEST_CASE("covariance matrices are symmetric PSD") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {10u, 50u, 200u}) {
    for (int dim : {1, 2}) {
      std::vector<Point> pts;
      for (std::size_t i = 0; i < n; ++i) pts.push_back({u(rng), dim == 2 ? u(rng) : 0.0});
      for (const GpSpec& spec : {GpSpec::rbf(0, 1.3, 0.1), GpSpec::exp_sine_squared(0, 1, 1, 4)}) {
        const Matrix c = covariance(spec, pts);
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const double piv = min_cholesky_pivot(c);
        CHECK_MESSAGE(piv > -1e-8, n << " points, dim " << dim << ", " << to_string(spec.kernel) << ": " << piv);
      }
    }
  }
}

TEST_CASE("sampling is seeded and deterministic") {
  std::vector<Point> pts;
  for (int i = 0; i <= 20; ++i) pts.push_back({i / 20.0, 0.0});
  const GpSpec spec = GpSpec::rbf(1.0, 0.2, 0.1, 42);
  const Vector a = sample_field(spec, pts);
  const Vector b = sample_field(spec, pts);
  CHECK(a == b);
  GpSpec other = spec;
  other.seed = 43;
  CHECK(sample_field(other, pts) != a);

  GpSpec tiny = spec;
  tiny.std = 1e-12;
  CHECK((sample_field(tiny, pts).array() - 1.0).abs().maxCoeff() < 1e-5);
}

TEST_CASE("affine pushforward is bit-exact") {
  std::vector<Point> pts;
  for (int i = 0; i <= 30; ++i) pts.push_back({i / 30.0, 0.5 * i / 30.0});
  for (std::uint64_t seed : {0u, 7u, 99u}) {
    const Vector unit = sample_field(GpSpec::rbf(0.0, 1.0, 0.15, seed), pts);
    const Vector scaled = sample_field(GpSpec::rbf(1.0, 0.2, 0.15, seed), pts);
    CHECK(scaled == (1.0 + 0.2 * unit.array()).matrix());
  }
}

TEST_CASE("Monte-Carlo covariance at two points") {
  const std::vector<Point> pts = {{0.3, 0.0}, {0.38, 0.0}};
  const GpSpec spec = GpSpec::rbf(0.5, 1.0, 0.1);
  GpSampler sampler(spec, pts);
  std::mt19937_64 rng(11);
  const int draws = 2000;
  double s0 = 0, s1 = 0, s01 = 0, s00 = 0;
  for (int d = 0; d < draws; ++d) {
    const Vector v = sampler.sample(rng);
    s0 += v[0];
    s1 += v[1];
    s01 += v[0] * v[1];
    s00 += v[0] * v[0];
  }
  const double m0 = s0 / draws, m1 = s1 / draws;
  const double cov01 = s01 / draws - m0 * m1;
  const double var0 = s00 / draws - m0 * m0;
  const Matrix c = covariance(spec, pts);
  CHECK(std::abs(cov01 - c(0, 1)) <= 0.1 * c(0, 1));
  CHECK(std::abs(var0 - c(0, 0)) <= 0.1 * c(0, 0));
}

TEST_CASE("factorization failure suggests a larger jitter") {
  // Duplicate points give a singular correlation matrix.
  const std::vector<Point> pts = {{0.5, 0.0}, {0.5, 0.0}};
  CHECK_NOTHROW(GpSampler(GpSpec::rbf(0, 1, 0.1), pts, 1e-8));
  try {
    GpSampler s(GpSpec::rbf(0, 1, 0.1), pts, 0.0);
    FAIL("expected failure");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("jitter") != std::string::npos);
  }
}

TEST_CASE("lattice sampler matches the dense covariance") {
  const StructuredGrid lattice(2, 7);
  const GpSpec spec = GpSpec::rbf(0.0, 1.0, 0.2);
  const LatticeGpSampler sampler(spec, lattice);
  std::mt19937_64 rng(5);
  const Vector v = sampler.sample(rng);
  CHECK(static_cast<std::size_t>(v.size()) == lattice.full_count());

  // Empirical covariance between two lattice nodes against the kernel.
  const std::size_t ia = lattice.full_index(2, 3), ib = lattice.full_index(3, 4);
  double sab = 0, saa = 0;
  const int draws = 4000;
  for (int d = 0; d < draws; ++d) {
    const Vector s = sampler.sample(rng);
    sab += s[static_cast<Eigen::Index>(ia)] * s[static_cast<Eigen::Index>(ib)];
    saa += s[static_cast<Eigen::Index>(ia)] * s[static_cast<Eigen::Index>(ia)];
  }
  const double kab = kernel_value(spec, lattice.full_point(ia), lattice.full_point(ib));
  CHECK(std::abs(sab / draws - kab) <= 0.1 * kab);
  CHECK(std::abs(saa / draws - 1.0) <= 0.1);

  CHECK_THROWS_AS(LatticeGpSampler(GpSpec::exp_sine_squared(0, 1, 1, 4), lattice), std::invalid_argument);

  const LatticeGpSampler s1(spec, StructuredGrid(1, 15));
  std::mt19937_64 r1(1);
  CHECK(s1.sample(r1).size() == 17);
}

TEST_CASE("positivity guard") {
  const Vector ok = (Vector(3) << 0.2, 1.0, 3.0).finished();
  const ClampReport same = positivity_guard(ok, 0.05);
  CHECK(same.values == ok);
  CHECK(same.clamped == 0);
  const ClampReport r = positivity_guard((Vector(2) << -0.1, 0.5).finished(), 0.05);
  CHECK(r.values == (Vector(2) << 0.05, 0.5).finished());
  CHECK(r.clamped == 1);
  CHECK_THROWS_AS(positivity_guard(ok, 0.0), std::invalid_argument);

  std::vector<Point> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({i / 99.0, 0.0});
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    total += positivity_guard(sample_field(GpSpec::rbf(1.0, 0.2, 0.1, seed), pts), 0.05).clamped;
  CHECK(total == 0);
}
