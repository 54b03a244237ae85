/// @file correctors.cpp
/// @brief Residual sampling, the MIONet corrector and the spectral oracles.

#include "hybrid/correctors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybrid {

namespace {

constexpr std::size_t kTrunkCacheLimit = 20'000'000;

// 5-point Gauss-Legendre rule on [0, 1].
constexpr double kGaussX[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                               0.76923465505284155, 0.95308992296933200};
constexpr double kGaussW[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                               0.23931433524968324, 0.11846344252809454};

std::vector<Point> output_nodes(const StructuredGrid& grid, bool full) {
  std::vector<Point> pts;
  const std::size_t count = full ? grid.full_count() : grid.interior_count();
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(full ? grid.full_point(i) : grid.interior_point(i));
  return pts;
}

}  // namespace

GridFunction Corrector::correct(const GridFunction& r) const {
  return GridFunction(r.grid, correct(r.values), r.includes_boundary);
}

Vector sample_residual(const StructuredGrid& grid, const Vector& r, const std::vector<Point>& sensors,
                       PaddingMode padding, bool augmented) {
  Vector out(static_cast<Eigen::Index>(sensors.size()));
  if (!augmented) {
    const PiecewiseLinearFn fn = residual_to_function(grid, r, padding);
    for (std::size_t i = 0; i < sensors.size(); ++i) out[static_cast<Eigen::Index>(i)] = fn(sensors[i]);
    return out;
  }
  if (static_cast<std::size_t>(r.size()) != grid.full_count())
    throw DimensionError("sample_residual: augmented residual must cover every node");
  Vector beta = r;
  for (std::size_t idx = 0; idx < grid.full_count(); ++idx)
    if (!grid.is_boundary(idx)) beta[static_cast<Eigen::Index>(idx)] /= grid.hat_integral(idx);
  const PiecewiseLinearFn fn(grid, beta);
  for (std::size_t i = 0; i < sensors.size(); ++i) out[static_cast<Eigen::Index>(i)] = fn(sensors[i]);
  return out;
}

MionetCorrector::MionetCorrector(std::shared_ptr<const MionetModel> model, StructuredGrid grid,
                                 const ScalarField& k, PaddingMode padding, bool augmented)
    : model_(std::move(model)), grid_(std::move(grid)), padding_(padding), augmented_(augmented) {
  if (!model_) throw std::invalid_argument("MionetCorrector: null model");
  model_->validate();
  if (!model_->is_solver_facing())
    throw std::invalid_argument("MionetCorrector: model must have a linear f-branch and zero output bias");
  if (model_->dim() != grid_.dim())
    throw DimensionError("MionetCorrector: model and grid dimensions differ");
  if (augmented_ && grid_.dim() != 2)
    throw std::invalid_argument("MionetCorrector: augmented systems are 2-d only");
  Vector ks(static_cast<Eigen::Index>(model_->k_sensors().size()));
  for (std::size_t i = 0; i < model_->k_sensors().size(); ++i) {
    const double v = k(model_->k_sensors()[i]);
    if (!std::isfinite(v)) throw NumericalError("MionetCorrector: k not finite at sensor " + std::to_string(i));
    ks[static_cast<Eigen::Index>(i)] = v;
  }
  branch_k_ = model_->branch_k_output(ks);
  nodes_ = output_nodes(grid_, augmented_);
  if (nodes_.size() * model_->width() <= kTrunkCacheLimit) trunk_ = model_->trunk_output(nodes_);
}

void MionetCorrector::set_forcing_samples(Vector f_samples) {
  if (static_cast<std::size_t>(f_samples.size()) != model_->f_sensors().size())
    throw DimensionError("MionetCorrector: forcing sample count does not match the f sensors");
  forcing_ = std::move(f_samples);
}

std::size_t MionetCorrector::size() const { return nodes_.size(); }

Vector MionetCorrector::predict(const Vector& f_samples) const {
  const Vector bf = model_->branch_f().weights()[0] * f_samples;
  const Vector coeff = branch_k_.cwiseProduct(bf);
  if (trunk_.size() > 0) return trunk_ * coeff;
  Vector out(static_cast<Eigen::Index>(nodes_.size()));
  constexpr std::size_t chunk = 4096;
  for (std::size_t b = 0; b < nodes_.size(); b += chunk) {
    const std::size_t e = std::min(nodes_.size(), b + chunk);
    const std::vector<Point> part(nodes_.begin() + static_cast<std::ptrdiff_t>(b),
                                  nodes_.begin() + static_cast<std::ptrdiff_t>(e));
    out.segment(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b)) =
        model_->trunk_output(part) * coeff;
  }
  return out;
}

Vector MionetCorrector::correct(const Vector& r) const {
  if (static_cast<std::size_t>(r.size()) != size())
    throw DimensionError("MionetCorrector: residual length " + std::to_string(r.size()) +
                         " does not match the grid (" + std::to_string(size()) + ")");
  return predict(sample_residual(grid_, r, model_->f_sensors(), padding_, augmented_));
}

Vector MionetCorrector::initial_guess(const Vector& b) const {
  if (forcing_) return predict(*forcing_);
  return correct(b);
}

SpectralOracle::SpectralOracle(StructuredGrid grid, std::size_t n0, Mode mode)
    : grid_(std::move(grid)), n0_(n0), mode_(mode) {
  const std::size_t n = grid_.n();
  if (n0_ < 1 || n0_ > n)
    throw std::invalid_argument("SpectralOracle: n0 = " + std::to_string(n0_) + " outside [1, " +
                                std::to_string(n) + "]");
  if (mode_ == Mode::ContinuousEig && grid_.dim() != 1)
    throw std::invalid_argument("SpectralOracle: ContinuousEig is 1-d only");
  const double h = grid_.h();
  low_ = sine_basis(n).leftCols(static_cast<Eigen::Index>(n0_));
  lambda_.resize(static_cast<Eigen::Index>(n0_));
  for (std::size_t i = 1; i <= n0_; ++i) {
    const double s = std::sin(std::numbers::pi * h * static_cast<double>(i) / 2.0);
    lambda_[static_cast<Eigen::Index>(i - 1)] = 4.0 / h * s * s;
  }
}

Vector SpectralOracle::correct(const Vector& r) const {
  if (static_cast<std::size_t>(r.size()) != size())
    throw DimensionError("SpectralOracle: residual length does not match the grid");
  const auto n = static_cast<Eigen::Index>(grid_.n());
  const double h = grid_.h();
  if (mode_ == Mode::DiscreteExact) {
    if (grid_.dim() == 1) {
      const Vector c = (low_.transpose() * r).cwiseQuotient(lambda_);
      return low_ * c;
    }
    const Eigen::Map<const Matrix> rm(r.data(), n, n);  // (x, y), x fastest
    Matrix c = low_.transpose() * rm * low_;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index j = 0; j < c.cols(); ++j)
        c(i, j) /= 4.0 - 2.0 * std::cos(static_cast<double>(i + 1) * std::numbers::pi * h) -
                   2.0 * std::cos(static_cast<double>(j + 1) * std::numbers::pi * h);
    const Matrix out = low_ * c * low_.transpose();
    return Eigen::Map<const Vector>(out.data(), n * n);
  }

  // Continuous route: lumped residual function, projection onto sin(i pi x),
  // inverse of the continuous eigenvalues, nodal interpolation.
  const PiecewiseLinearFn beta = residual_to_function(grid_, r, PaddingMode::Replicate);
  Vector coef = Vector::Zero(static_cast<Eigen::Index>(n0_));
  for (std::size_t e = 0; e <= grid_.n(); ++e) {
    const double x0 = static_cast<double>(e) * h;
    for (int q = 0; q < 5; ++q) {
      const double x = x0 + kGaussX[q] * h;
      const double w = kGaussW[q] * h * beta(x);
      for (std::size_t i = 1; i <= n0_; ++i)
        coef[static_cast<Eigen::Index>(i - 1)] += 2.0 * w * std::sin(static_cast<double>(i) * std::numbers::pi * x);
    }
  }
  Vector out = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = static_cast<double>(j + 1) * h;
    for (std::size_t i = 1; i <= n0_; ++i) {
      const double ip = static_cast<double>(i) * std::numbers::pi;
      out[j] += coef[static_cast<Eigen::Index>(i - 1)] / (ip * ip) * std::sin(ip * x);
    }
  }
  return out;
}

std::string SpectralOracle::name() const { return "oracle-" + to_string(mode_); }

std::string to_string(SpectralOracle::Mode mode) {
  return mode == SpectralOracle::Mode::DiscreteExact ? "discrete" : "continuous";
}

SpectralOracle::Mode parse_oracle_mode(const std::string& name) {
  if (name == "discrete" || name == "discrete_exact") return SpectralOracle::Mode::DiscreteExact;
  if (name == "continuous" || name == "continuous_eig") return SpectralOracle::Mode::ContinuousEig;
  throw std::invalid_argument("unknown oracle mode '" + name + "'");
}

std::shared_ptr<SpectralOracle> spectral_oracle_corrector(const StructuredGrid& grid, std::size_t n0,
                                                          SpectralOracle::Mode mode) {
  return std::make_shared<SpectralOracle>(grid, n0, mode);
}

ScaledCorrector::ScaledCorrector(std::shared_ptr<const Corrector> inner, double factor)
    : inner_(std::move(inner)), factor_(factor) {
  if (!inner_) throw std::invalid_argument("ScaledCorrector: null inner corrector");
  if (!std::isfinite(factor_)) throw std::invalid_argument("ScaledCorrector: factor must be finite");
}

std::string ScaledCorrector::name() const { return "scaled-" + inner_->name(); }

}  // namespace hybrid
