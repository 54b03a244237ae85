/// @file mionet.hpp
/// @brief Multiple-input operator network with a linear forcing branch.
///
/// The model maps sampled inputs (k, f) and a query point y to
///
///   out(y) = sum_j [branch_k(k)]_j * [branch_f(f)]_j * [trunk(y)]_j + bias
///
/// branch_f is a single bias-free linear layer and the output bias is pinned
/// at zero for solver-facing models, so the network is exactly linear in f
/// and maps f = 0 to 0 for every k.
///
/// Batched math is row-major in the batch: an input batch is (batch x in)
/// and every layer computes X W^T + b with W stored as (out x in).

#pragma once

#include "hybrid/container.hpp"
#include "hybrid/fem.hpp"
#include "hybrid/linalg.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hybrid {

enum class Activation { Tanh, Relu, None };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Activations and pre-activations of one batched forward pass.
struct MlpCache {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> outputs; // post-activation output of each layer
};

struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Fully connected network. Hidden layers use the activation; the last
/// layer is affine.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> dims, Activation activation, bool bias);

  /// One bias-free layer without activation.
  static Mlp linear_map(std::size_t in, std::size_t out);

  /// Uniform init in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
  void initialize(std::mt19937_64& rng);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t in_dim() const { return dims_.front(); }
  std::size_t out_dim() const { return dims_.back(); }
  std::size_t num_layers() const { return weights_.size(); }
  Activation activation() const { return activation_; }
  bool has_bias() const { return bias_; }
  /// Exactly one layer, no bias, no activation.
  bool is_linear() const;

  std::vector<Matrix>& weights() { return weights_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  std::vector<Vector>& biases() { return biases_; }
  const std::vector<Vector>& biases() const { return biases_; }

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, MlpCache& cache) const;

  /// Accumulates parameter gradients for output gradient dy into grads and
  /// returns the gradient with respect to the input batch.
  Matrix backward(const MlpCache& cache, const Matrix& dy, MlpGrads& grads) const;

  MlpGrads zero_grads() const;
  std::size_t num_params() const;

 private:
  std::vector<std::size_t> dims_;
  Activation activation_ = Activation::Tanh;
  bool bias_ = true;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

struct MionetArchitecture {
  int dim = 1;
  std::vector<std::size_t> branch_k_dims{50, 100, 100, 100};
  std::vector<std::size_t> branch_f_dims{50, 100};
  std::vector<std::size_t> trunk_dims{1, 100, 100, 100};
  Activation activation = Activation::Tanh;

  static MionetArchitecture defaults_1d();
  static MionetArchitecture defaults_2d();
  void validate() const;
};

struct MionetGrads {
  MlpGrads branch_k;
  MlpGrads branch_f;
  MlpGrads trunk;
};

class MionetModel {
 public:
  MionetModel() = default;
  MionetModel(const MionetArchitecture& arch, std::vector<Point> k_sensors,
              std::vector<Point> f_sensors);
  /// Assembles a model from prebuilt networks (weights kept as given).
  MionetModel(int dim, Mlp branch_k, Mlp branch_f, Mlp trunk, std::vector<Point> k_sensors,
              std::vector<Point> f_sensors);

  /// Random initialization from the given seed.
  void initialize(std::uint64_t seed);

  int dim() const { return dim_; }
  std::size_t width() const { return trunk_.out_dim(); }
  const Mlp& branch_k() const { return branch_k_; }
  const Mlp& branch_f() const { return branch_f_; }
  const Mlp& trunk() const { return trunk_; }
  Mlp& branch_k() { return branch_k_; }
  Mlp& branch_f() { return branch_f_; }
  Mlp& trunk() { return trunk_; }
  double output_bias() const { return output_bias_; }
  void set_output_bias(double b) { output_bias_ = b; }
  const std::vector<Point>& k_sensors() const { return k_sensors_; }
  const std::vector<Point>& f_sensors() const { return f_sensors_; }

  /// Linear f-branch and zero output bias.
  bool is_solver_facing() const;
  /// Throws on inconsistent widths, sensor counts, or non-finite weights.
  void validate() const;

  /// Output at each query point.
  Vector forward(const Vector& k_samples, const Vector& f_samples,
                 const std::vector<Point>& queries) const;

  /// Batched output (records x queries).
  Matrix forward_batch(const Matrix& k_batch, const Matrix& f_batch, const Matrix& query_coords) const;

  /// scale * (mean squared error over all entries) and, when grads is
  /// non-null, its parameter gradient accumulated into grads.
  double loss_and_grad(const Matrix& k_batch, const Matrix& f_batch, const Matrix& query_coords,
                       const Matrix& targets, MionetGrads* grads, double scale = 1.0) const;

  Vector branch_k_output(const Vector& k_samples) const;
  /// Trunk outputs at the points, (points x width).
  Matrix trunk_output(const std::vector<Point>& points) const;

  /// Trainable parameter blocks in a fixed order, and matching gradient
  /// blocks.
  std::vector<std::span<double>> parameters();
  static std::vector<std::span<double>> gradient_blocks(MionetGrads& g);
  MionetGrads zero_grads() const;
  std::size_t num_params() const;

  Matrix query_matrix(const std::vector<Point>& points) const;

 private:
  int dim_ = 1;
  Mlp branch_k_;
  Mlp branch_f_;
  Mlp trunk_;
  double output_bias_ = 0.0;
  std::vector<Point> k_sensors_;
  std::vector<Point> f_sensors_;
};

/// Uniform sensor lattice including the boundary: m points on [0,1] (1-d) or
/// m x m points on the unit square (2-d), lexicographic with x fastest.
std::vector<Point> sensor_lattice(int dim, std::size_t m);

/// Adam moments for resuming training.
struct AdamState {
  std::vector<Vector> m;
  std::vector<Vector> v;
  std::uint64_t step = 0;
  /// Completed epochs, used to resume a decaying learning-rate schedule.
  std::uint64_t epoch = 0;
};

Container model_to_container(const MionetModel& model, const AdamState* adam = nullptr,
                             const nlohmann::json& extra_meta = nlohmann::json::object());
MionetModel model_from_container(const Container& c, AdamState* adam = nullptr);

void save_weights(const MionetModel& model, const std::string& path,
                  const AdamState* adam = nullptr,
                  const nlohmann::json& extra_meta = nlohmann::json::object());
MionetModel load_weights(const std::string& path, AdamState* adam = nullptr);

}  // namespace hybrid
