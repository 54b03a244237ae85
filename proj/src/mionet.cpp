/// @file mionet.cpp
/// @brief Forward and backward passes of the MLPs and the merged MIONet output.

#include "hybrid/mionet.hpp"

#include <cmath>
#include <stdexcept>

namespace hybrid {

namespace {

void apply_activation(Activation a, Matrix& z) {
  switch (a) {
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
    case Activation::Relu: z = z.cwiseMax(0.0); break;
    case Activation::None: break;
  }
}

// Multiplies dy in place by the activation derivative, expressed through the
// post-activation output.
void activation_backward(Activation a, const Matrix& out, Matrix& dy) {
  switch (a) {
    case Activation::Tanh: dy.array() *= 1.0 - out.array().square(); break;
    case Activation::Relu: dy.array() *= (out.array() > 0.0).cast<double>(); break;
    case Activation::None: break;
  }
}

bool finite_params(const Mlp& m) {
  for (const auto& w : m.weights())
    if (!w.allFinite()) return false;
  for (const auto& b : m.biases())
    if (!b.allFinite()) return false;
  return true;
}

void add_blocks(std::vector<std::span<double>>& out, std::vector<Matrix>& ws, std::vector<Vector>& bs) {
  for (std::size_t l = 0; l < ws.size(); ++l) {
    out.emplace_back(ws[l].data(), static_cast<std::size_t>(ws[l].size()));
    if (l < bs.size()) out.emplace_back(bs[l].data(), static_cast<std::size_t>(bs[l].size()));
  }
}

nlohmann::json mlp_meta(const Mlp& m) {
  return {{"dims", m.dims()},
          {"activation", to_string(m.activation())},
          {"bias", m.has_bias()},
          {"linear", m.is_linear()}};
}

void mlp_tensors(Container& c, const std::string& prefix, const Mlp& m) {
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    add_matrix(c, prefix + ".weight." + std::to_string(l), m.weights()[l]);
    if (m.has_bias()) {
      const Vector& b = m.biases()[l];
      c.add(prefix + ".bias." + std::to_string(l), {static_cast<std::size_t>(b.size())},
            std::vector<double>(b.data(), b.data() + b.size()));
    }
  }
}

Mlp mlp_from(const Container& c, const std::string& prefix) {
  const auto& meta = c.meta.at(prefix);
  Mlp m(meta.at("dims").get<std::vector<std::size_t>>(),
        parse_activation(meta.at("activation").get<std::string>()), meta.at("bias").get<bool>());
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    m.weights()[l] =
        get_matrix(c, prefix + ".weight." + std::to_string(l), m.dims()[l + 1], m.dims()[l]);
    if (m.has_bias()) {
      const Tensor& t = c.get(prefix + ".bias." + std::to_string(l));
      if (t.shape.size() != 1 || t.shape[0] != m.dims()[l + 1])
        throw ContainerError("model: tensor '" + t.name + "' has shape inconsistent with the architecture");
      m.biases()[l] = Eigen::Map<const Vector>(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
    }
  }
  return m;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::None: return "none";
  }
  return "none";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "none") return Activation::None;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<std::size_t> dims, Activation activation, bool bias)
    : dims_(std::move(dims)), activation_(activation), bias_(bias) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
  for (std::size_t d : dims_)
    if (d == 0) throw std::invalid_argument("Mlp: layer widths must be positive");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.push_back(Matrix::Zero(static_cast<Eigen::Index>(dims_[l + 1]),
                                    static_cast<Eigen::Index>(dims_[l])));
    if (bias_) biases_.push_back(Vector::Zero(static_cast<Eigen::Index>(dims_[l + 1])));
  }
}

Mlp Mlp::linear_map(std::size_t in, std::size_t out) {
  return Mlp({in, out}, Activation::None, false);
}

bool Mlp::is_linear() const {
  return weights_.size() == 1 && !bias_ && activation_ == Activation::None;
}

void Mlp::initialize(std::mt19937_64& rng) {
  for (auto& w : weights_) {
    const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-a, a);
    // Row-major fill order so the draw sequence does not depend on storage.
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
  }
  for (auto& b : biases_) b.setZero();
}

Matrix Mlp::forward(const Matrix& x) const {
  MlpCache unused;
  return forward(x, unused);
}

Matrix Mlp::forward(const Matrix& x, MlpCache& cache) const {
  if (static_cast<std::size_t>(x.cols()) != in_dim())
    throw DimensionError("Mlp::forward: input width " + std::to_string(x.cols()) + " != " +
                         std::to_string(in_dim()));
  cache.inputs.clear();
  cache.outputs.clear();
  Matrix cur = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    cache.inputs.push_back(cur);
    Matrix z = cur * weights_[l].transpose();
    if (bias_) z.rowwise() += biases_[l].transpose();
    if (l + 1 < weights_.size()) apply_activation(activation_, z);
    cache.outputs.push_back(z);
    cur = std::move(z);
  }
  return cur;
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& dy, MlpGrads& grads) const {
  Matrix d = dy;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    if (l + 1 < weights_.size()) activation_backward(activation_, cache.outputs[l], d);
    grads.weights[l].noalias() += d.transpose() * cache.inputs[l];
    if (bias_) grads.biases[l] += d.colwise().sum().transpose();
    d = d * weights_[l];
  }
  return d;
}

MlpGrads Mlp::zero_grads() const {
  MlpGrads g;
  for (const auto& w : weights_) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : biases_) g.biases.push_back(Vector::Zero(b.size()));
  return g;
}

std::size_t Mlp::num_params() const {
  std::size_t n = 0;
  for (const auto& w : weights_) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases_) n += static_cast<std::size_t>(b.size());
  return n;
}

MionetArchitecture MionetArchitecture::defaults_1d() { return {}; }

MionetArchitecture MionetArchitecture::defaults_2d() {
  MionetArchitecture a;
  a.dim = 2;
  a.branch_k_dims = {100 * 100, 500, 500, 500};
  a.branch_f_dims = {100 * 100, 500};
  a.trunk_dims = {2, 500, 500, 500};
  return a;
}

void MionetArchitecture::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("architecture: dim must be 1 or 2");
  if (branch_k_dims.size() < 2 || branch_f_dims.size() < 2 || trunk_dims.size() < 2)
    throw std::invalid_argument("architecture: every network needs at least two widths");
  if (branch_k_dims.back() != branch_f_dims.back() || branch_k_dims.back() != trunk_dims.back())
    throw std::invalid_argument("architecture: branch and trunk output widths must agree");
  if (trunk_dims.front() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("architecture: trunk input width must equal dim");
}

MionetModel::MionetModel(const MionetArchitecture& arch, std::vector<Point> k_sensors,
                         std::vector<Point> f_sensors)
    : dim_(arch.dim), k_sensors_(std::move(k_sensors)), f_sensors_(std::move(f_sensors)) {
  arch.validate();
  branch_k_ = Mlp(arch.branch_k_dims, arch.activation, true);
  branch_f_ = arch.branch_f_dims.size() == 2
                  ? Mlp::linear_map(arch.branch_f_dims[0], arch.branch_f_dims[1])
                  : Mlp(arch.branch_f_dims, arch.activation, true);
  trunk_ = Mlp(arch.trunk_dims, arch.activation, true);
  validate();
}

MionetModel::MionetModel(int dim, Mlp branch_k, Mlp branch_f, Mlp trunk,
                         std::vector<Point> k_sensors, std::vector<Point> f_sensors)
    : dim_(dim),
      branch_k_(std::move(branch_k)),
      branch_f_(std::move(branch_f)),
      trunk_(std::move(trunk)),
      k_sensors_(std::move(k_sensors)),
      f_sensors_(std::move(f_sensors)) {
  validate();
}

void MionetModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  branch_k_.initialize(rng);
  branch_f_.initialize(rng);
  trunk_.initialize(rng);
}

bool MionetModel::is_solver_facing() const {
  return branch_f_.is_linear() && output_bias_ == 0.0;
}

void MionetModel::validate() const {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("model: dim must be 1 or 2");
  if (branch_k_.out_dim() != branch_f_.out_dim() || branch_k_.out_dim() != trunk_.out_dim())
    throw DimensionError("model: branch and trunk output widths differ");
  if (trunk_.in_dim() != static_cast<std::size_t>(dim_))
    throw DimensionError("model: trunk input width must equal dim");
  if (branch_k_.in_dim() != k_sensors_.size())
    throw DimensionError("model: branch_k input width " + std::to_string(branch_k_.in_dim()) +
                         " != k sensor count " + std::to_string(k_sensors_.size()));
  if (branch_f_.in_dim() != f_sensors_.size())
    throw DimensionError("model: branch_f input width " + std::to_string(branch_f_.in_dim()) +
                         " != f sensor count " + std::to_string(f_sensors_.size()));
  if (!finite_params(branch_k_) || !finite_params(branch_f_) || !finite_params(trunk_) ||
      !std::isfinite(output_bias_))
    throw NumericalError("model: non-finite parameters");
}

Matrix MionetModel::query_matrix(const std::vector<Point>& points) const {
  Matrix y(static_cast<Eigen::Index>(points.size()), dim_);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int d = 0; d < dim_; ++d) y(static_cast<Eigen::Index>(i), d) = points[i][static_cast<std::size_t>(d)];
  return y;
}

Vector MionetModel::forward(const Vector& k_samples, const Vector& f_samples,
                            const std::vector<Point>& queries) const {
  if (static_cast<std::size_t>(k_samples.size()) != k_sensors_.size())
    throw DimensionError("forward: k sample count does not match the k sensors");
  if (static_cast<std::size_t>(f_samples.size()) != f_sensors_.size())
    throw DimensionError("forward: f sample count does not match the f sensors");
  for (const auto& q : queries)
    if (q[0] < -1e-12 || q[0] > 1.0 + 1e-12 || (dim_ == 2 && (q[1] < -1e-12 || q[1] > 1.0 + 1e-12)))
      throw std::out_of_range("forward: query point outside the closed unit domain");
  const Matrix out = forward_batch(k_samples.transpose(), f_samples.transpose(), query_matrix(queries));
  return out.row(0).transpose();
}

Matrix MionetModel::forward_batch(const Matrix& k_batch, const Matrix& f_batch,
                                  const Matrix& query_coords) const {
  if (k_batch.rows() != f_batch.rows())
    throw DimensionError("forward_batch: k and f batches differ in size");
  const Matrix bk = branch_k_.forward(k_batch);
  const Matrix bf = branch_f_.forward(f_batch);
  const Matrix t = trunk_.forward(query_coords);
  Matrix out = bk.cwiseProduct(bf) * t.transpose();
  if (output_bias_ != 0.0) out.array() += output_bias_;
  return out;
}

double MionetModel::loss_and_grad(const Matrix& k_batch, const Matrix& f_batch,
                                  const Matrix& query_coords, const Matrix& targets,
                                  MionetGrads* grads, double scale) const {
  if (k_batch.rows() != f_batch.rows() || targets.rows() != k_batch.rows() ||
      targets.cols() != query_coords.rows())
    throw DimensionError("loss_and_grad: batch shapes are inconsistent");
  MlpCache ck, cf, ct;
  const Matrix bk = branch_k_.forward(k_batch, ck);
  const Matrix bf = branch_f_.forward(f_batch, cf);
  const Matrix t = trunk_.forward(query_coords, ct);
  const Matrix prod = bk.cwiseProduct(bf);
  Matrix diff = prod * t.transpose();
  if (output_bias_ != 0.0) diff.array() += output_bias_;
  diff -= targets;
  const double count = static_cast<double>(diff.size());
  const double loss = scale * diff.squaredNorm() / count;
  if (grads == nullptr) return loss;

  const double c = 2.0 / count * scale;
  const Matrix d_out = c * diff;
  const Matrix d_prod = d_out * t;
  const Matrix d_t = d_out.transpose() * prod;
  branch_k_.backward(ck, d_prod.cwiseProduct(bf), grads->branch_k);
  branch_f_.backward(cf, d_prod.cwiseProduct(bk), grads->branch_f);
  trunk_.backward(ct, d_t, grads->trunk);
  return loss;
}

Vector MionetModel::branch_k_output(const Vector& k_samples) const {
  if (static_cast<std::size_t>(k_samples.size()) != k_sensors_.size())
    throw DimensionError("branch_k_output: k sample count does not match the k sensors");
  return branch_k_.forward(k_samples.transpose()).row(0).transpose();
}

Matrix MionetModel::trunk_output(const std::vector<Point>& points) const {
  return trunk_.forward(query_matrix(points));
}

std::vector<std::span<double>> MionetModel::parameters() {
  std::vector<std::span<double>> out;
  add_blocks(out, branch_k_.weights(), branch_k_.biases());
  add_blocks(out, branch_f_.weights(), branch_f_.biases());
  add_blocks(out, trunk_.weights(), trunk_.biases());
  return out;
}

std::vector<std::span<double>> MionetModel::gradient_blocks(MionetGrads& g) {
  std::vector<std::span<double>> out;
  add_blocks(out, g.branch_k.weights, g.branch_k.biases);
  add_blocks(out, g.branch_f.weights, g.branch_f.biases);
  add_blocks(out, g.trunk.weights, g.trunk.biases);
  return out;
}

MionetGrads MionetModel::zero_grads() const {
  return {branch_k_.zero_grads(), branch_f_.zero_grads(), trunk_.zero_grads()};
}

std::size_t MionetModel::num_params() const {
  return branch_k_.num_params() + branch_f_.num_params() + trunk_.num_params();
}

std::vector<Point> sensor_lattice(int dim, std::size_t m) {
  if (m < 2) throw std::invalid_argument("sensor_lattice: need at least 2 points per axis");
  if (dim != 1 && dim != 2) throw std::invalid_argument("sensor_lattice: dim must be 1 or 2");
  const double step = 1.0 / static_cast<double>(m - 1);
  std::vector<Point> pts;
  if (dim == 1) {
    for (std::size_t i = 0; i < m; ++i) pts.push_back({static_cast<double>(i) * step, 0.0});
  } else {
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i)
        pts.push_back({static_cast<double>(i) * step, static_cast<double>(j) * step});
  }
  return pts;
}

Container model_to_container(const MionetModel& model, const AdamState* adam,
                             const nlohmann::json& extra_meta) {
  model.validate();
  Container c;
  c.meta = {{"kind", "mionet"},
            {"dim", model.dim()},
            {"width", model.width()},
            {"output_bias", model.output_bias()},
            {"branch_k", mlp_meta(model.branch_k())},
            {"branch_f", mlp_meta(model.branch_f())},
            {"trunk", mlp_meta(model.trunk())}};
  if (!extra_meta.is_null() && !extra_meta.empty()) c.meta["training"] = extra_meta;
  mlp_tensors(c, "branch_k", model.branch_k());
  mlp_tensors(c, "branch_f", model.branch_f());
  mlp_tensors(c, "trunk", model.trunk());
  add_points(c, "k_sensors", model.k_sensors());
  add_points(c, "f_sensors", model.f_sensors());
  if (adam != nullptr) {
    c.meta["adam_step"] = adam->step;
    c.meta["adam_epoch"] = adam->epoch;
    for (std::size_t i = 0; i < adam->m.size(); ++i) {
      const auto n = static_cast<std::size_t>(adam->m[i].size());
      c.add("adam.m." + std::to_string(i), {n}, std::vector<double>(adam->m[i].data(), adam->m[i].data() + n));
      c.add("adam.v." + std::to_string(i), {n}, std::vector<double>(adam->v[i].data(), adam->v[i].data() + n));
    }
  }
  return c;
}

MionetModel model_from_container(const Container& c, AdamState* adam) {
  try {
    if (c.meta.value("kind", std::string()) != "mionet")
      throw ContainerError("model: container does not hold a MIONet model");
    MionetModel model(c.meta.at("dim").get<int>(), mlp_from(c, "branch_k"), mlp_from(c, "branch_f"),
                      mlp_from(c, "trunk"), get_points(c, "k_sensors"), get_points(c, "f_sensors"));
    model.set_output_bias(c.meta.at("output_bias").get<double>());
    if (adam != nullptr) {
      *adam = AdamState{};
      if (c.meta.contains("adam_step")) {
        adam->step = c.meta.at("adam_step").get<std::uint64_t>();
        adam->epoch = c.meta.value("adam_epoch", std::uint64_t{0});
        auto blocks = model.parameters();
        for (std::size_t i = 0; i < blocks.size(); ++i) {
          const Tensor& m = c.get("adam.m." + std::to_string(i));
          const Tensor& v = c.get("adam.v." + std::to_string(i));
          if (m.data.size() != blocks[i].size() || v.data.size() != blocks[i].size())
            throw ContainerError("model: optimizer state '" + m.name + "' does not match parameters");
          adam->m.push_back(Eigen::Map<const Vector>(m.data.data(), static_cast<Eigen::Index>(m.data.size())));
          adam->v.push_back(Eigen::Map<const Vector>(v.data.data(), static_cast<Eigen::Index>(v.data.size())));
        }
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("model: malformed metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ContainerError(std::string("model: ") + e.what());
  }
}

void save_weights(const MionetModel& model, const std::string& path, const AdamState* adam,
                  const nlohmann::json& extra_meta) {
  write_container(model_to_container(model, adam, extra_meta), path);
}

MionetModel load_weights(const std::string& path, AdamState* adam) {
  return model_from_container(read_container(path), adam);
}

}  // namespace hybrid
