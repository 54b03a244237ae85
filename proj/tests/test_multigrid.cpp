/// @file test_multigrid.cpp
/// @brief Transfers, hierarchy construction and V-cycle convergence.

#include <doctest.h>

#include "hybrid/fem.hpp"
#include "hybrid/multigrid.hpp"

#include <cmath>
#include <random>

using namespace hybrid;

namespace {

const ScalarField kOne = [](const Point&) { return 1.0; };

Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

// Geometric mean of residual ratios over cycles [from, to].
double mean_factor(const IterationTrace& t, std::size_t from, std::size_t to) {
  return std::pow(t.entries[to].residual_l2 / t.entries[from - 1].residual_l2,
                  1.0 / static_cast<double>(to - from + 1));
}

IterationTrace run_cycles(const MgHierarchy& h, const Vector& b, std::size_t cycles) {
  return mg_solve(h, b, Vector::Zero(b.size()), StopRule{1e-300, cycles});
}

}  // namespace

TEST_CASE("1-d prolongation weights") {
  const CsrMatrix p = build_prolongation(StructuredGrid(1, 7));
  CHECK(p.rows() == 7);
  CHECK(p.cols() == 3);
  // The coarse midpoint x = 1/2 is fine node 4.
  const Vector v = spmv(p, (Vector(3) << 0, 1, 0).finished());
  CHECK(v == (Vector(7) << 0, 0, 0.5, 1, 0.5, 0, 0).finished());
  const Vector w = spmv(p, (Vector(3) << 1, 0, 0).finished());
  CHECK(w == (Vector(7) << 0.5, 1, 0.5, 0, 0, 0, 0).finished());
  CHECK_THROWS_AS(build_prolongation(StructuredGrid(1, 8)), std::invalid_argument);
  CHECK_THROWS_AS(build_prolongation(StructuredGrid(1, 1)), std::invalid_argument);
}

TEST_CASE("prolongation preserves linear functions away from the boundary") {
  for (int dim : {1, 2}) {
    const StructuredGrid fine(dim, 15);
    const StructuredGrid coarse(dim, 7);
    const CsrMatrix p = build_prolongation(fine);
    auto lin = [](const Point& x) { return 1.0 + 2.0 * x[0] - 0.5 * x[1]; };
    Vector vc(static_cast<Eigen::Index>(coarse.interior_count()));
    for (std::size_t i = 0; i < coarse.interior_count(); ++i) vc[static_cast<Eigen::Index>(i)] = lin(coarse.interior_point(i));
    const Vector vf = spmv(p, vc);
    // Fine nodes whose coarse neighbours are all interior.
    for (std::size_t i = 0; i < fine.interior_count(); ++i) {
      const Point x = fine.interior_point(i);
      bool inner = x[0] > 1.5 / 8.0 - 1e-12 && x[0] < 1.0 - 1.5 / 8.0 + 1e-12;
      if (dim == 2) inner = inner && x[1] > 1.5 / 8.0 - 1e-12 && x[1] < 1.0 - 1.5 / 8.0 + 1e-12;
      if (inner) CHECK(vf[static_cast<Eigen::Index>(i)] == doctest::Approx(lin(x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("hierarchy construction") {
  const MgHierarchy h1 = build_hierarchy(StructuredGrid(1, 3), kOne, 2);
  CHECK(h1.num_levels() == 2);
  CHECK(h1.level(1).grid.n() == 1);
  Vector mu = Vector::Zero(3);
  h1.vcycle(Vector::Ones(3), mu);
  CHECK(mu.allFinite());

  const MgHierarchy h2 = build_hierarchy(StructuredGrid(2, 127), kOne, 5);
  const std::size_t expect[] = {127, 63, 31, 15, 7};
  for (std::size_t l = 0; l < 5; ++l) CHECK(h2.level(l).grid.n() == expect[l]);
  CHECK(h2.pre_sweeps() == 2);
  CHECK(h2.post_sweeps() == 2);
  CHECK(h2.level(4).prolongation.rows() == 0);

  // Restriction is the plain transpose of interpolation.
  const MgLevel& l0 = h2.level(0);
  CHECK(l0.restriction.to_dense() == l0.prolongation.to_dense().transpose());

  CHECK_THROWS_AS(build_hierarchy(StructuredGrid(1, 9), kOne, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_hierarchy(StructuredGrid(1, 7), kOne, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_hierarchy(StructuredGrid(1, 7), kOne, 4), std::invalid_argument);

  CHECK(max_levels(StructuredGrid(1, 63)) == 6);
  CHECK(max_levels(StructuredGrid(1, 63), 7) == 4);
  CHECK(max_levels(StructuredGrid(1, 48)) == 1);
}

TEST_CASE("coarse operator matches the Galerkin product for k=1") {
  for (int dim : {1, 2}) {
    const MgHierarchy h = build_hierarchy(StructuredGrid(dim, 15), kOne, 2);
    const Matrix p = h.level(0).prolongation.to_dense();
    const Matrix galerkin = p.transpose() * h.level(0).a.to_dense() * p;
    CHECK((galerkin - h.level(1).a.to_dense()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("V-cycle leaves the zero solution fixed") {
  const MgHierarchy h = build_hierarchy(StructuredGrid(2, 15), kOne, 3);
  Vector mu = Vector::Zero(225);
  vcycle(h, Vector::Zero(225), mu);
  CHECK(mu == Vector::Zero(225));
  Vector bad = Vector::Zero(10);
  CHECK_THROWS_AS(vcycle(h, Vector::Zero(225), bad), DimensionError);
}

TEST_CASE("1-d V(1,1) reaches 1e-10 relative in 15 cycles") {
  const StructuredGrid g(1, 63);
  const MgHierarchy h = build_hierarchy(g, kOne, max_levels(g), 1, 1);
  const Vector b = random_vector(63, 3);
  const IterationTrace t = run_cycles(h, b, 15);
  CHECK(t.entries.back().residual_l2 < 1e-10 * t.entries.front().residual_l2);
}

TEST_CASE("2-d V(2,2) convergence factor on 129^2") {
  const StructuredGrid g(2, 127);
  const MgHierarchy h = build_hierarchy(g, kOne, 5);
  const Vector b = assemble_load(g, kOne).values;
  const IterationTrace t = run_cycles(h, b, 8);
  for (std::size_t m = 3; m <= 8; ++m) {
    const double f = t.entries[m].residual_l2 / t.entries[m - 1].residual_l2;
    CHECK(f <= 0.25);
  }
  MESSAGE("factor " << mean_factor(t, 3, 8));
}

TEST_CASE("V(2,2) factor is h-independent") {
  auto factor = [](std::size_t n) {
    const StructuredGrid g(2, n);
    const MgHierarchy h = build_hierarchy(g, kOne, max_levels(g, 3));
    const Vector b = random_vector(static_cast<Eigen::Index>(g.interior_count()), 21);
    return mean_factor(run_cycles(h, b, 8), 3, 8);
  };
  const double f65 = factor(63);
  const double f257 = factor(255);
  MESSAGE("65^2: " << f65 << "  257^2: " << f257);
  CHECK(std::abs(f65 - f257) < 0.1);
}

TEST_CASE("mg_solve with variable k converges to the direct solution") {
  const StructuredGrid g(2, 31);
  auto k = [](const Point& p) { return 1.0 + 0.5 * std::sin(4.0 * p[0]) * p[1]; };
  const MgHierarchy h = build_hierarchy(g, k, 4);
  const Vector b = random_vector(961, 4);
  const IterationTrace t = mg_solve(h, b, Vector::Zero(961), StopRule{1e-10, 100});
  CHECK(t.status == SolveStatus::Converged);
  CHECK(t.iterations < 30);
  const Vector ref = Eigen::LLT<Matrix>(h.fine_operator().to_dense()).solve(b);
  CHECK((t.solution - ref).norm() < 1e-8 * ref.norm());
  CHECK(t.entries[1].kind == StepKind::VCycle);
}
