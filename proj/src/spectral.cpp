/// @file spectral.cpp
/// @brief Sine-basis diagnostics, rate bounds and the Gauss-Seidel symbol.

#include "hybrid/spectral.hpp"

#include "hybrid/smoothers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace hybrid {

namespace {

constexpr double kPi = std::numbers::pi;

// Golden-section maximization of g on [lo, hi].
template <typename F>
double golden_max(F&& g, double lo, double hi, int iters = 80) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  for (int i = 0; i < iters; ++i) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  // Endpoints matter when the maximum sits on the boundary of the strip.
  double best = (a + b) / 2.0;
  double gbest = g(best);
  for (double x : {lo, hi}) {
    const double gx = g(x);
    if (gx > gbest) {
      gbest = gx;
      best = x;
    }
  }
  return best;
}

struct Box {
  double lo1, hi1, lo2, hi2;
};

}  // namespace

Eigenpairs eigenpairs_1d(std::size_t n) {
  if (n < 1) throw std::invalid_argument("eigenpairs_1d: n must be >= 1");
  const double h = 1.0 / static_cast<double>(n + 1);
  Eigenpairs e;
  e.lambda.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = std::sin(kPi * h * static_cast<double>(i) / 2.0);
    e.lambda[static_cast<Eigen::Index>(i - 1)] = 4.0 / h * s * s;
  }
  e.xi = sine_basis(n);
  return e;
}

SpectralHeatmap spectral_heatmap(const IterationTrace& trace, std::size_t n) {
  if (trace.error_vectors.empty())
    throw std::invalid_argument("spectral_heatmap: trace holds no error vectors (no reference solution)");
  const double h = 1.0 / static_cast<double>(n + 1);
  SpectralHeatmap map;
  map.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(trace.error_vectors.size()));
  for (std::size_t m = 0; m < trace.error_vectors.size(); ++m) {
    const Vector& e = trace.error_vectors[m];
    if (static_cast<std::size_t>(e.size()) != n)
      throw DimensionError("spectral_heatmap: error vector length differs from n");
    const Vector alpha = sine_transform_1d(e, n, h);
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
      map.values(i, static_cast<Eigen::Index>(m)) = std::log10(std::abs(alpha[i]) + kHeatmapFloor);
  }
  return map;
}

void write_heatmap_csv(const SpectralHeatmap& map, std::ostream& os) {
  os << "mode";
  for (Eigen::Index m = 0; m < map.values.cols(); ++m) os << ",step_" << m;
  os << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
    os << i + 1;
    for (Eigen::Index m = 0; m < map.values.cols(); ++m) {
      std::snprintf(buf, sizeof buf, ",%.6f", map.values(i, m));
      os << buf;
    }
    os << '\n';
  }
}

void RateParams::validate() const {
  if (!(eta2 > 0.0 && eta2 < eta1 && eta1 < 1.0))
    throw std::invalid_argument("rate params: need 0 < eta2 < eta1 < 1");
  if (!(eps >= 0.0) || !(R >= 0.0)) throw std::invalid_argument("rate params: eps and R must be >= 0");
}

double rate_bound(std::size_t M, const RateParams& p) {
  if (M < 1) throw std::invalid_argument("rate_bound: M must be >= 1");
  p.validate();
  const double m = static_cast<double>(M);
  return p.eta1 * std::pow(p.eps / p.eta1 + p.R / p.eta2 * std::pow(p.eta2 / p.eta1, m), 1.0 / m);
}

std::size_t argmin_rate(const RateParams& p, std::size_t M_max) {
  if (M_max < 2) throw std::invalid_argument("argmin_rate: M_max must be >= 2");
  std::size_t best = 1;
  double best_v = rate_bound(1, p);
  for (std::size_t M = 2; M <= M_max; ++M) {
    const double v = rate_bound(M, p);
    if (v < best_v) {
      best_v = v;
      best = M;
    }
  }
  return best;
}

void write_rate_csv(const RateParams& p, std::size_t M_max, std::ostream& os) {
  os << "M,rate\n";
  char buf[64];
  for (std::size_t M = 1; M <= M_max; ++M) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f\n", M, rate_bound(M, p));
    os << buf;
  }
}

std::size_t richardson_M_bound(double norm_IMA, double rho_IwA) {
  if (!(rho_IwA > 0.0 && rho_IwA < 1.0))
    throw std::invalid_argument("richardson_M_bound: rho must lie in (0, 1)");
  if (!(norm_IMA > 0.0)) throw std::invalid_argument("richardson_M_bound: norm must be positive");
  const double v = 2.0 + std::floor(-std::log(norm_IMA) / std::log(rho_IwA));
  return v < 1.0 ? 1 : static_cast<std::size_t>(v);
}

double gs_symbol(double theta1, double theta2) {
  const std::complex<double> a = std::polar(1.0, theta1);
  const std::complex<double> b = std::polar(1.0, theta2);
  return std::abs(a + b) / std::abs(4.0 - a - b);
}

double smoothing_factor(double rho, std::size_t resolution) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("smoothing_factor: rho must lie in (0, 1)");
  if (resolution < 2) throw std::invalid_argument("smoothing_factor: resolution must be >= 2");
  const double lo = rho * kPi;
  const Box boxes[4] = {{lo, kPi, -kPi, kPi}, {-kPi, -lo, -kPi, kPi}, {-kPi, kPi, lo, kPi}, {-kPi, kPi, -kPi, -lo}};
  double best = -1.0;
  double b1 = 0.0, b2 = 0.0;
  const Box* best_box = &boxes[0];
  const double steps = static_cast<double>(resolution - 1);
  for (const Box& bx : boxes) {
    for (std::size_t i = 0; i < resolution; ++i) {
      const double t1 = bx.lo1 + (bx.hi1 - bx.lo1) * static_cast<double>(i) / steps;
      for (std::size_t j = 0; j < resolution; ++j) {
        const double t2 = bx.lo2 + (bx.hi2 - bx.lo2) * static_cast<double>(j) / steps;
        const double v = gs_symbol(t1, t2);
        if (v > best) {
          best = v;
          b1 = t1;
          b2 = t2;
          best_box = &bx;
        }
      }
    }
  }
  // Coordinate-wise refinement inside one grid cell of the argmax.
  const Box& bx = *best_box;
  const double d1 = (bx.hi1 - bx.lo1) / steps;
  const double d2 = (bx.hi2 - bx.lo2) / steps;
  for (int round = 0; round < 30; ++round) {
    b1 = golden_max([&](double t) { return gs_symbol(t, b2); }, std::max(bx.lo1, b1 - d1),
                    std::min(bx.hi1, b1 + d1));
    b2 = golden_max([&](double t) { return gs_symbol(b1, t); }, std::max(bx.lo2, b2 - d2),
                    std::min(bx.hi2, b2 + d2));
  }
  return std::max(best, gs_symbol(b1, b2));
}

double rate_bound_gs(std::size_t M, double zeta0, double zeta_rho, double eps, double R) {
  if (M < 1) throw std::invalid_argument("rate_bound_gs: M must be >= 1");
  if (!(zeta_rho > 0.0 && zeta_rho < zeta0 && zeta0 < 1.0))
    throw std::invalid_argument("rate_bound_gs: need 0 < zeta_rho < zeta0 < 1");
  const double m = static_cast<double>(M);
  return zeta0 * std::pow(eps / zeta0 + R / zeta_rho * std::pow(zeta_rho / zeta0, m - 1.0), 1.0 / m);
}

double estimate_zeta0(const StructuredGrid& grid, std::size_t sweeps) {
  if (grid.dim() != 2) throw std::invalid_argument("estimate_zeta0: needs a 2-d grid");
  if (sweeps < 2) throw std::invalid_argument("estimate_zeta0: need at least 2 sweeps");
  const CsrMatrix a = assemble_stiffness(grid, [](const Point&) { return 1.0; });
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(grid.interior_count()));
  Vector e(static_cast<Eigen::Index>(grid.interior_count()));
  for (std::size_t idx = 0; idx < grid.interior_count(); ++idx) {
    const Point p = grid.interior_point(idx);
    e[static_cast<Eigen::Index>(idx)] = std::sin(kPi * p[0]) * std::sin(kPi * p[1]);
  }
  // Warm up over half the sweeps, then average the contraction of the rest.
  const std::size_t warm = sweeps / 2;
  double start_norm = 0.0;
  for (std::size_t s = 0; s < sweeps; ++s) {
    if (s == warm) start_norm = norm_l2(e);
    smoother_step(SmootherKind::gauss_seidel(), a, zero, e);
  }
  return std::pow(norm_l2(e) / start_norm, 1.0 / static_cast<double>(sweeps - warm));
}

ModelErrorSpectrum model_error_spectrum(const Corrector& corrector, const StructuredGrid& grid,
                                        std::size_t n0) {
  if (grid.dim() != 1) throw std::invalid_argument("model_error_spectrum: needs a 1-d grid");
  const std::size_t n = grid.n();
  if (n0 > n) throw std::invalid_argument("model_error_spectrum: n0 exceeds n");
  if (corrector.size() != n) throw DimensionError("model_error_spectrum: corrector does not match the grid");
  const Eigenpairs ep = eigenpairs_1d(n);
  ModelErrorSpectrum s;
  s.norms.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Vector xi = ep.xi.col(ii);
    const double v = norm_l2(xi - corrector.correct(ep.lambda[ii] * xi));
    s.norms[ii] = v;
    (i < n0 ? s.eps : s.R) += v;
  }
  return s;
}

RateParams rate_params_1d(const StructuredGrid& grid, std::size_t n0, const ModelErrorSpectrum& s) {
  const double h = grid.h();
  const double c1 = std::cos(kPi * h / 2.0);
  const double c2 = std::cos(kPi * h * static_cast<double>(n0 + 1) / 2.0);
  return {c1 * c1, c2 * c2, s.eps, s.R};
}

Matrix hybrid_iteration_matrix(std::size_t n, double omega, const Corrector& corrector, std::size_t M) {
  if (M < 1) throw std::invalid_argument("hybrid_iteration_matrix: M must be >= 1");
  if (corrector.size() != n) throw DimensionError("hybrid_iteration_matrix: corrector size differs from n");
  const StructuredGrid grid(1, n);
  const Matrix a = assemble_stiffness(grid, [](const Point&) { return 1.0; }).to_dense();
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix c(nn, nn);
  for (Eigen::Index j = 0; j < nn; ++j) c.col(j) = corrector.correct(Vector::Unit(nn, j));
  const Matrix id = Matrix::Identity(nn, nn);
  const Matrix s = id - omega * a;
  Matrix u = id - c * a;
  for (std::size_t k = 1; k < M; ++k) u = s * u;
  return u;
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix must be square");
  if (m.rows() == 0) return 0.0;
  const Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace hybrid
