/// @file spectral.hpp
/// @brief Eigen-diagnostics, rate bounds and local-mode analysis of the
/// hybrid iteration.

#pragma once

#include "hybrid/correctors.hpp"
#include "hybrid/fem.hpp"
#include "hybrid/linalg.hpp"
#include "hybrid/trace.hpp"

#include <iosfwd>
#include <vector>

namespace hybrid {

struct Eigenpairs {
  Vector lambda;
  /// Column i-1 holds the i-th eigenvector.
  Matrix xi;
};

/// Eigenpairs of the 1-d k=1 stiffness matrix (1/h) tridiag(-1, 2, -1).
Eigenpairs eigenpairs_1d(std::size_t n);

/// Floor added before taking log10 of spectral coefficients.
inline constexpr double kHeatmapFloor = 1e-300;

struct SpectralHeatmap {
  /// values(i, m) = log10(|(Xi^T e^(m))_i| + floor), mode-major.
  Matrix values;
};

/// Needs the per-step error vectors of a 1-d trace.
SpectralHeatmap spectral_heatmap(const IterationTrace& trace, std::size_t n);

/// One CSV row per mode, one column per stored step (header step indices).
void write_heatmap_csv(const SpectralHeatmap& map, std::ostream& os);

struct RateParams {
  double eta1 = 0.999;
  double eta2 = 0.5;
  double eps = 0.1;
  double R = 10.0;

  void validate() const;
};

/// eta1 * (eps/eta1 + R/eta2 * (eta2/eta1)^M)^(1/M).
double rate_bound(std::size_t M, const RateParams& p);

/// Smallest M in [1, M_max] minimizing rate_bound.
std::size_t argmin_rate(const RateParams& p, std::size_t M_max);

/// CSV "M,rate" for M = 1..M_max.
void write_rate_csv(const RateParams& p, std::size_t M_max, std::ostream& os);

/// 2 + floor(-ln(norm) / ln(rho)), at least 1.
std::size_t richardson_M_bound(double norm_IMA, double rho_IwA);

/// |(e^{i t1} + e^{i t2}) / (4 - e^{i t1} - e^{i t2})|.
double gs_symbol(double theta1, double theta2);

/// Max of gs_symbol over rho*pi <= max(|t1|, |t2|) <= pi, from a uniform
/// grid with `resolution` points per axis per admissible strip followed by
/// coordinate golden-section refinement.
double smoothing_factor(double rho, std::size_t resolution = 512);

/// zeta0 * (eps/zeta0 + R/zeta_rho * (zeta_rho/zeta0)^(M-1))^(1/M).
double rate_bound_gs(std::size_t M, double zeta0, double zeta_rho, double eps, double R);

/// Estimator (not a closed form): observed per-sweep contraction of the
/// lowest sine mode under lexicographic Gauss-Seidel on the k=1 2-d grid.
double estimate_zeta0(const StructuredGrid& grid, std::size_t sweeps = 60);

struct ModelErrorSpectrum {
  /// norms[i-1] = ||xi^i - corrector(lambda_i xi^i)||_2.
  Vector norms;
  double eps = 0.0;  // sum over i <= n0
  double R = 0.0;    // sum over i > n0
};

ModelErrorSpectrum model_error_spectrum(const Corrector& corrector, const StructuredGrid& grid,
                                        std::size_t n0);

/// eta1 = cos^2(pi h / 2), eta2 = cos^2(pi h (n0 + 1) / 2) with eps and R
/// from a measured spectrum.
RateParams rate_params_1d(const StructuredGrid& grid, std::size_t n0, const ModelErrorSpectrum& s);

/// Dense U = (I - omega A)^(M-1) (I - C A) for the 1-d k=1 operator and
/// corrector C. Intended for n <= 64.
Matrix hybrid_iteration_matrix(std::size_t n, double omega, const Corrector& corrector, std::size_t M);

/// Largest eigenvalue modulus of a dense square matrix.
double spectral_radius(const Matrix& m);

}  // namespace hybrid
