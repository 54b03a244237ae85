/// @file correctors.hpp
/// @brief Correction operators r -> delta mu used by the hybrid iteration.

#pragma once

#include "hybrid/fem.hpp"
#include "hybrid/linalg.hpp"
#include "hybrid/mionet.hpp"

#include <memory>
#include <optional>
#include <string>

namespace hybrid {

class Corrector {
 public:
  virtual ~Corrector() = default;

  /// Length of the vectors the corrector acts on.
  virtual std::size_t size() const = 0;
  /// Linear map from a residual to a solution update.
  virtual Vector correct(const Vector& r) const = 0;
  /// Starting iterate for right-hand side b. Defaults to correct(b).
  virtual Vector initial_guess(const Vector& b) const { return correct(b); }
  virtual std::string name() const = 0;

  GridFunction correct(const GridFunction& r) const;
};

/// Residual sampling on the forcing sensors: lumped nodal values r_i / int
/// phi_i, boundary ring by the padding mode, P1 evaluation at each sensor.
/// With `augmented`, r covers every node and boundary entries are used as
/// they are (they carry boundary data, not integrated loads).
Vector sample_residual(const StructuredGrid& grid, const Vector& r, const std::vector<Point>& sensors,
                       PaddingMode padding, bool augmented = false);

class MionetCorrector : public Corrector {
 public:
  /// The model must be solver-facing. k is sampled once at the k sensors.
  /// With `augmented`, the corrector acts on full-grid vectors of a 2-d
  /// augmented system and predicts every node.
  MionetCorrector(std::shared_ptr<const MionetModel> model, StructuredGrid grid, const ScalarField& k,
                  PaddingMode padding = PaddingMode::Replicate, bool augmented = false);

  /// Forcing samples used by initial_guess instead of sampling b.
  void set_forcing_samples(Vector f_samples);

  using Corrector::correct;
  std::size_t size() const override;
  Vector correct(const Vector& r) const override;
  Vector initial_guess(const Vector& b) const override;
  std::string name() const override { return "mionet"; }

  /// Model output at the output nodes for given forcing samples.
  Vector predict(const Vector& f_samples) const;

 private:
  std::shared_ptr<const MionetModel> model_;
  StructuredGrid grid_;
  PaddingMode padding_;
  bool augmented_;
  Vector branch_k_;
  std::vector<Point> nodes_;
  Matrix trunk_;  // empty when too large to cache
  std::optional<Vector> forcing_;
};

class SpectralOracle : public Corrector {
 public:
  enum class Mode { DiscreteExact, ContinuousEig };

  /// n0 trusted modes per axis, 1 <= n0 <= n. ContinuousEig needs a 1-d
  /// grid.
  SpectralOracle(StructuredGrid grid, std::size_t n0, Mode mode);

  using Corrector::correct;
  std::size_t size() const override { return grid_.interior_count(); }
  Vector correct(const Vector& r) const override;
  std::string name() const override;

  std::size_t n0() const { return n0_; }
  Mode mode() const { return mode_; }

 private:
  StructuredGrid grid_;
  std::size_t n0_;
  Mode mode_;
  Matrix low_;    // n x n0 leading sine vectors
  Vector lambda_; // 1-d eigenvalues of the trusted modes
};

std::string to_string(SpectralOracle::Mode mode);
SpectralOracle::Mode parse_oracle_mode(const std::string& name);

std::shared_ptr<SpectralOracle> spectral_oracle_corrector(const StructuredGrid& grid, std::size_t n0,
                                                          SpectralOracle::Mode mode);

/// factor * inner.correct(r); used to build deliberately bad correctors.
class ScaledCorrector : public Corrector {
 public:
  ScaledCorrector(std::shared_ptr<const Corrector> inner, double factor);

  using Corrector::correct;
  std::size_t size() const override { return inner_->size(); }
  Vector correct(const Vector& r) const override { return factor_ * inner_->correct(r); }
  Vector initial_guess(const Vector& b) const override { return inner_->initial_guess(b); }
  std::string name() const override;

 private:
  std::shared_ptr<const Corrector> inner_;
  double factor_;
};

}  // namespace hybrid
