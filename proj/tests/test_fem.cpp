/// @file test_fem.cpp
/// @brief Grids, P1 assembly, residual functions and the augmented system.

#include <doctest.h>

#include "hybrid/fem.hpp"
#include "hybrid/smoothers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace hybrid;

namespace {

constexpr double kPi = std::numbers::pi;
const ScalarField kOne = [](const Point&) { return 1.0; };

Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

// 4-point Gauss-Legendre on [a, b].
template <typename F>
double gauss4(F&& f, double a, double b) {
  static const double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                              0.8611363115940526};
  static const double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                              0.3478548451374538};
  double s = 0.0;
  for (int q = 0; q < 4; ++q) s += w[q] * f(0.5 * (a + b) + 0.5 * (b - a) * x[q]);
  return 0.5 * (b - a) * s;
}

}  // namespace

TEST_CASE("StructuredGrid geometry") {
  for (std::size_t n : {1u, 3u, 48u, 1023u}) {
    const StructuredGrid g(1, n);
    CHECK(std::abs(g.h() * static_cast<double>(n + 1) - 1.0) < 1e-14);
    CHECK(g.interior_count() == n);
    CHECK(g.full_count() == n + 2);
  }
  const StructuredGrid g2(2, 3);
  CHECK(g2.interior_count() == 9);
  CHECK(g2.full_count() == 25);
  CHECK(g2.interior_index(2, 3) == 7);
  CHECK(g2.full_index(1, 2) == 11);
  CHECK(g2.interior_to_full(g2.interior_index(2, 3)) == g2.full_index(2, 3));
  const Point p = g2.interior_point(g2.interior_index(1, 2));
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 0.5);
  CHECK(g2.is_boundary(g2.full_index(0, 2)));
  CHECK_FALSE(g2.is_boundary(g2.full_index(1, 1)));
  CHECK_THROWS_AS(StructuredGrid(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(StructuredGrid(1, 0), std::invalid_argument);
}

TEST_CASE("hat integrals") {
  const StructuredGrid g1(1, 3);
  CHECK(g1.hat_integral(2) == doctest::Approx(0.25));
  CHECK(g1.hat_integral(0) == doctest::Approx(0.125));
  const StructuredGrid g2(2, 3);
  const double h2 = 1.0 / 16.0;
  CHECK(g2.hat_integral(g2.full_index(2, 2)) == doctest::Approx(h2));
  // Corner (0,0) lies on a cell diagonal and touches two triangles; corner
  // (4,0) touches one.
  CHECK(g2.hat_integral(g2.full_index(0, 0)) == doctest::Approx(2.0 * h2 / 6.0));
  CHECK(g2.hat_integral(g2.full_index(4, 0)) == doctest::Approx(h2 / 6.0));
  CHECK(g2.hat_integral(g2.full_index(2, 0)) == doctest::Approx(3.0 * h2 / 6.0));
  double total = 0.0;
  for (std::size_t i = 0; i < g2.full_count(); ++i) total += g2.hat_integral(i);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("boundary parameter") {
  CHECK(boundary_parameter({0.25, 0.0}) == 0.25);
  CHECK(boundary_parameter({1.0, 0.5}) == 1.5);
  CHECK(boundary_parameter({0.25, 1.0}) == 2.75);
  CHECK(boundary_parameter({0.0, 0.25}) == 3.75);
  CHECK_THROWS_AS(boundary_parameter({0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("1-d stiffness examples") {
  const StructuredGrid g(1, 3);
  const Matrix a = assemble_stiffness_1d(g, kOne).to_dense();
  Matrix expect(3, 3);
  expect << 8, -4, 0, -4, 8, -4, 0, -4, 8;
  CHECK(a == expect);
  const Matrix a2 = assemble_stiffness_1d(g, [](const Point&) { return 2.0; }).to_dense();
  CHECK(a2 == 2.0 * expect);

  // Oracle: dense assembly with 4-point Gauss quadrature of k = 1 + x.
  auto k = [](double x) { return 1.0 + x; };
  const Matrix av = assemble_stiffness_1d(g, [&](const Point& p) { return k(p[0]); }).to_dense();
  const double h = 0.25;
  Matrix oracle = Matrix::Zero(3, 3);
  for (int e = 0; e < 4; ++e) {
    const double ke = gauss4(k, e * h, (e + 1) * h) / (h * h);
    const int l = e - 1, r = e;  // interior indices of the element's endpoints
    if (l >= 0) oracle(l, l) += ke;
    if (r <= 2) oracle(r, r) += ke;
    if (l >= 0 && r <= 2) {
      oracle(l, r) -= ke;
      oracle(r, l) -= ke;
    }
  }
  CHECK((av - oracle).cwiseAbs().maxCoeff() <= 1e-3 * oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("stiffness rejects bad coefficients") {
  const StructuredGrid g(1, 3);
  CHECK_THROWS_AS(assemble_stiffness_1d(g, [](const Point&) { return 0.0; }), NumericalError);
  CHECK_THROWS_AS(assemble_stiffness_1d(g, [](const Point&) { return NAN; }), NumericalError);
  CHECK_THROWS_AS(assemble_stiffness_2d(StructuredGrid(2, 3), [](const Point& p) { return p[0] - 0.5; }),
                  NumericalError);
  CHECK_THROWS_AS(assemble_stiffness_1d(StructuredGrid(2, 3), kOne), std::invalid_argument);
}

TEST_CASE("2-d stiffness stencil") {
  const StructuredGrid g(2, 5);
  const CsrMatrix a = assemble_stiffness_2d(g, kOne);
  const std::size_t c = g.interior_index(3, 3);
  CHECK(a.row_ptr()[c + 1] - a.row_ptr()[c] == 5);
  CHECK(a.at(c, c) == 4.0);
  CHECK(a.at(c, g.interior_index(2, 3)) == -1.0);
  CHECK(a.at(c, g.interior_index(4, 3)) == -1.0);
  CHECK(a.at(c, g.interior_index(3, 2)) == -1.0);
  CHECK(a.at(c, g.interior_index(3, 4)) == -1.0);
  CHECK(a.at(c, g.interior_index(4, 4)) == 0.0);

  const StructuredGrid g3(2, 3);
  const CsrMatrix a3 = assemble_stiffness_2d(g3, kOne);
  const Vector y = spmv(a3, Vector::Ones(9));
  CHECK(y[static_cast<Eigen::Index>(g3.interior_index(1, 1))] == 2.0);
  CHECK(y[static_cast<Eigen::Index>(g3.interior_index(3, 3))] == 2.0);
  CHECK(y[static_cast<Eigen::Index>(g3.interior_index(2, 2))] == 0.0);
  CHECK(assemble_stiffness_2d(g3, [](const Point&) { return 3.0; }).to_dense() == 3.0 * a3.to_dense());
}

TEST_CASE("stiffness is symmetric positive definite") {
  auto k = [](const Point& p) { return 1.0 + p[0] + 0.5 * std::sin(3.0 * p[1]); };
  for (int dim : {1, 2}) {
    for (std::size_t n : {3u, 7u, 16u}) {
      const CsrMatrix a = assemble_stiffness(StructuredGrid(dim, n), k);
      const Matrix d = a.to_dense();
      CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(d).eigenvalues()[0] > 0.0);
    }
  }
}

TEST_CASE("1-d eigenpairs of the assembled operator") {
  for (std::size_t n : {16u, 48u}) {
    const double h = 1.0 / static_cast<double>(n + 1);
    const CsrMatrix a = assemble_stiffness_1d(StructuredGrid(1, n), kOne);
    const Matrix xi = sine_basis(n);
    double worst = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double lam = 4.0 / h * std::pow(std::sin(kPi * h * static_cast<double>(i) / 2.0), 2);
      const Vector v = xi.col(static_cast<Eigen::Index>(i - 1));
      worst = std::max(worst, (spmv(a, v) - lam * v).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("load vector examples") {
  const StructuredGrid g1(1, 7);
  const GridFunction b1 = assemble_load(g1, kOne);
  CHECK_FALSE(b1.includes_boundary);
  for (Eigen::Index i = 0; i < b1.values.size(); ++i) CHECK(b1.values[i] == doctest::Approx(g1.h()).epsilon(1e-14));
  CHECK(assemble_load(g1, [](const Point&) { return 0.0; }).values == Vector::Zero(7));

  const StructuredGrid g2(2, 7);
  const GridFunction b2 = assemble_load(g2, kOne);
  const double h2 = g2.h() * g2.h();
  for (Eigen::Index i = 0; i < b2.values.size(); ++i) CHECK(b2.values[i] == doctest::Approx(h2).epsilon(1e-13));
  CHECK_THROWS_AS(assemble_load(g1, [](const Point&) { return INFINITY; }), NumericalError);
}

TEST_CASE("load vector of a smooth source converges") {
  // b_i / h -> f(x_i) for smooth f.
  const StructuredGrid g(1, 63);
  const GridFunction b = assemble_load(g, [](const Point& p) { return std::sin(kPi * p[0]); });
  for (std::size_t i = 0; i < 63; ++i)
    CHECK(b.values[static_cast<Eigen::Index>(i)] / g.h() ==
          doctest::Approx(std::sin(kPi * g.interior_point(i)[0])).epsilon(1e-3));
}

TEST_CASE("PiecewiseLinearFn evaluation") {
  const StructuredGrid g(2, 4);
  const Vector v = random_vector(static_cast<Eigen::Index>(g.full_count()), 5);
  const PiecewiseLinearFn fn(g, v);
  for (std::size_t i = 0; i < g.full_count(); ++i) CHECK(fn(g.full_point(i)) == v[static_cast<Eigen::Index>(i)]);
  // Continuity across the diagonal edge and the axis edges.
  const double h = g.h();
  const Point mid_diag{1.5 * h, 1.5 * h};
  CHECK(fn({mid_diag[0] + 1e-12, mid_diag[1]}) == doctest::Approx(fn({mid_diag[0], mid_diag[1] + 1e-12})));
  CHECK(fn({2.0 * h - 1e-13, 2.5 * h}) == doctest::Approx(fn({2.0 * h + 1e-13, 2.5 * h})));

  // Linear functions are reproduced exactly.
  Vector lin(static_cast<Eigen::Index>(g.full_count()));
  for (std::size_t i = 0; i < g.full_count(); ++i) {
    const Point p = g.full_point(i);
    lin[static_cast<Eigen::Index>(i)] = 1.0 + 2.0 * p[0] - 3.0 * p[1];
  }
  const PiecewiseLinearFn lfn(g, lin);
  CHECK(lfn({0.37, 0.81}) == doctest::Approx(1.0 + 0.74 - 2.43).epsilon(1e-14));

  CHECK_THROWS_AS(fn({1.1, 0.5}), std::out_of_range);
  CHECK_THROWS_AS(PiecewiseLinearFn(g, Vector::Zero(3)), DimensionError);
}

TEST_CASE("residual_to_function examples") {
  const StructuredGrid g(1, 3);
  const PiecewiseLinearFn one = residual_to_function(g, assemble_load(g, kOne));
  for (std::size_t i = 1; i <= 3; ++i) CHECK(one.nodal_values()[static_cast<Eigen::Index>(i)] == doctest::Approx(1.0));

  const PiecewiseLinearFn z = residual_to_function(g, Vector::Zero(3));
  CHECK(z.nodal_values() == Vector::Zero(5));

  const PiecewiseLinearFn rep = residual_to_function(g, (Vector(3) << 1, 0, 0).finished(), PaddingMode::Replicate);
  CHECK(rep.nodal_values() == (Vector(5) << 4, 4, 0, 0, 0).finished());
  const PiecewiseLinearFn zero = residual_to_function(g, (Vector(3) << 1, 0, 0).finished(), PaddingMode::Zero);
  CHECK(zero.nodal_values() == (Vector(5) << 0, 4, 0, 0, 0).finished());

  CHECK_THROWS_AS(residual_to_function(g, Vector::Zero(5)), DimensionError);
}

TEST_CASE("residual_to_function 2-d lumping and replication") {
  const StructuredGrid g(2, 3);
  const GridFunction b = assemble_load(g, kOne);
  const PiecewiseLinearFn fn = residual_to_function(g, b);
  for (Eigen::Index i = 0; i < fn.nodal_values().size(); ++i)
    CHECK(fn.nodal_values()[i] == doctest::Approx(1.0).epsilon(1e-13));
  Vector r = Vector::Zero(9);
  r[static_cast<Eigen::Index>(g.interior_index(1, 1))] = 1.0;
  const PiecewiseLinearFn corner = residual_to_function(g, r, PaddingMode::Replicate);
  const double beta = 16.0;
  CHECK(corner.nodal_values()[static_cast<Eigen::Index>(g.full_index(0, 0))] == doctest::Approx(beta));
  CHECK(corner.nodal_values()[static_cast<Eigen::Index>(g.full_index(1, 0))] == doctest::Approx(beta));
  CHECK(corner.nodal_values()[static_cast<Eigen::Index>(g.full_index(2, 0))] == 0.0);
}

TEST_CASE("residual_to_function is linear") {
  for (int dim : {1, 2}) {
    const StructuredGrid g(dim, 6);
    const auto n = static_cast<Eigen::Index>(g.interior_count());
    const Vector r1 = random_vector(n, 1);
    const Vector r2 = random_vector(n, 2);
    for (PaddingMode mode : {PaddingMode::Zero, PaddingMode::Replicate}) {
      const PiecewiseLinearFn lhs = residual_to_function(g, Vector(2.0 * r1 - 3.0 * r2), mode);
      const PiecewiseLinearFn a = residual_to_function(g, r1, mode);
      const PiecewiseLinearFn b = residual_to_function(g, r2, mode);
      for (const Point& p : {Point{0.13, 0.77}, Point{0.5, 0.5}, Point{0.99, 0.01}})
        CHECK(std::abs(lhs(p) - (2.0 * a(p) - 3.0 * b(p))) <= 1e-12 * (1.0 + std::abs(lhs(p))));
    }
  }
}

TEST_CASE("interpolate_at_nodes") {
  const StructuredGrid g(1, 3);
  const GridFunction s = interpolate_at_nodes([](const Point& p) { return std::sin(kPi * p[0]); }, g);
  CHECK(s.values[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(s.values[1] == doctest::Approx(1.0));
  CHECK(s.values[2] == doctest::Approx(std::sqrt(0.5)));
  CHECK(interpolate_at_nodes([](const Point&) { return 0.0; }, g).values == Vector::Zero(3));

  const StructuredGrid g2(2, 5);
  const Vector v = random_vector(static_cast<Eigen::Index>(g2.full_count()), 3);
  const PiecewiseLinearFn fn(g2, v);
  CHECK(interpolate_at_nodes([&](const Point& p) { return fn(p); }, g2, true).values == v);
  CHECK_THROWS_AS(interpolate_at_nodes([](const Point&) { return NAN; }, g), NumericalError);
}

TEST_CASE("augmented 2-d system") {
  const StructuredGrid g(2, 3);
  const AugmentedSystem one = assemble_augmented_2d(g, kOne, [](const Point&) { return 0.0; },
                                                    [](double) { return 1.0; });
  CHECK(one.b.includes_boundary);
  // mu = 1 is the exact discrete solution.
  CHECK(residual(one.a, one.b.values, Vector::Ones(25)).cwiseAbs().maxCoeff() < 1e-14);
  for (std::size_t i = 0; i < g.full_count(); ++i) {
    if (!g.is_boundary(i)) continue;
    CHECK(one.a.row_ptr()[i + 1] - one.a.row_ptr()[i] == 1);
    CHECK(one.a.at(i, i) == 1.0);
  }

  // g = 0 reproduces the homogeneous solution.
  auto f = [](const Point& p) { return std::sin(kPi * p[0]) * p[1]; };
  const AugmentedSystem zero = assemble_augmented_2d(g, kOne, f, [](double) { return 0.0; });
  const Vector full = zero.a.to_dense().partialPivLu().solve(zero.b.values);
  const CsrMatrix a = assemble_stiffness_2d(g, kOne);
  const Vector interior = a.to_dense().llt().solve(assemble_load(g, f).values);
  CHECK((full - extend_to_full(g, interior)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((restrict_to_interior(g, full) - interior).cwiseAbs().maxCoeff() < 1e-13);

  CHECK_THROWS_AS(assemble_augmented_2d(g, kOne, f, [](double) { return NAN; }), NumericalError);
  CHECK_THROWS_AS(assemble_augmented_2d(StructuredGrid(1, 3), kOne, f, [](double) { return 0.0; }),
                  std::invalid_argument);
}

TEST_CASE("manufactured 1-d solution") {
  // -u'' = pi^2 sin(pi x): 1-d P1 nodal values are exact up to the load
  // quadrature, so the nodal error decays at least at second order.
  double prev = 0.0;
  for (std::size_t n : {31u, 63u}) {
    const StructuredGrid g(1, n);
    const CsrMatrix a = assemble_stiffness_1d(g, kOne);
    const Vector b = assemble_load(g, [](const Point& p) { return kPi * kPi * std::sin(kPi * p[0]); }).values;
    const Vector u = a.to_dense().llt().solve(b);
    const Vector exact = interpolate_at_nodes([](const Point& p) { return std::sin(kPi * p[0]); }, g).values;
    const double err = (u - exact).cwiseAbs().maxCoeff();
    CHECK(err < 1e-4);
    if (prev > 0.0) CHECK(prev / err > 3.6);
    prev = err;
  }
}

TEST_CASE("periodic boundary interpolant") {
  // Unsorted samples of a hat: 0 at t=0, 2 at t=1, 0 at t=2 and t=3.
  const BoundaryField g = periodic_boundary_interpolant({2.0, 0.0, 3.0, 1.0}, {0.0, 0.0, 0.0, 2.0});
  CHECK(g(0.0) == 0.0);
  CHECK(g(1.0) == 2.0);
  CHECK(g(0.5) == doctest::Approx(1.0));
  CHECK(g(1.25) == doctest::Approx(1.5));
  // Period 4, in both directions.
  for (double t : {0.3, 1.7, 2.9, 3.6}) {
    CHECK(g(t + 4.0) == doctest::Approx(g(t)).epsilon(1e-14));
    CHECK(g(t - 8.0) == doctest::Approx(g(t)).epsilon(1e-14));
  }
  // The wrap segment joins the last sample back to the first.
  const BoundaryField w = periodic_boundary_interpolant({0.0, 3.0}, {1.0, 3.0});
  CHECK(w(3.5) == doctest::Approx(2.0));
  CHECK(w(-0.5) == doctest::Approx(2.0));
  CHECK(periodic_boundary_interpolant({1.0}, {5.0})(2.7) == 5.0);

  CHECK_THROWS_AS(periodic_boundary_interpolant({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(periodic_boundary_interpolant({0.0, 1.0}, {1.0}), std::invalid_argument);
}
