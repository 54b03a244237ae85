/// @file training.cpp
/// @brief Adam training loop, loss metrics and finite-difference gradient checks.

#include "hybrid/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hybrid {

namespace {

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx, std::size_t begin,
                   std::size_t end) {
  Matrix out(static_cast<Eigen::Index>(end - begin), src.cols());
  for (std::size_t i = begin; i < end; ++i)
    out.row(static_cast<Eigen::Index>(i - begin)) = src.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

void init_adam(const MionetModel& model, AdamState& adam) {
  if (!adam.m.empty()) return;
  MionetModel copy = model;
  for (const auto& block : copy.parameters()) {
    adam.m.push_back(Vector::Zero(static_cast<Eigen::Index>(block.size())));
    adam.v.push_back(Vector::Zero(static_cast<Eigen::Index>(block.size())));
  }
  adam.step = 0;
  adam.epoch = 0;
}

using MatrixX = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

MatrixX mlp_forward_ext(const Mlp& net, const Matrix& x) {
  MatrixX z = x.cast<long double>();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    MatrixX next = z * net.weights()[l].cast<long double>().transpose();
    if (net.has_bias()) next.rowwise() += net.biases()[l].cast<long double>().transpose();
    if (l + 1 < net.num_layers()) {
      if (net.activation() == Activation::Tanh)
        next = next.unaryExpr([](long double v) { return std::tanh(v); });
      else if (net.activation() == Activation::Relu)
        next = next.cwiseMax(0.0L);
    }
    z = std::move(next);
  }
  return z;
}

// Single-record loss in extended precision, so that central differences are
// not dominated by rounding when gradients are small.
long double loss_ext(const MionetModel& m, const Matrix& kb, const Matrix& fb, const Matrix& q,
                     const Matrix& tb) {
  const MatrixX bk = mlp_forward_ext(m.branch_k(), kb);
  const MatrixX bf = mlp_forward_ext(m.branch_f(), fb);
  const MatrixX tr = mlp_forward_ext(m.trunk(), q);
  const MatrixX pred = (tr * bk.cwiseProduct(bf).transpose()).transpose().array() +
                       static_cast<long double>(m.output_bias());
  const MatrixX diff = pred - tb.cast<long double>();
  return diff.squaredNorm() / static_cast<long double>(diff.size());
}

}  // namespace

void TrainOptions::validate() const {
  if (batch_size == 0) throw std::invalid_argument("training: batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("training: learning_rate must be positive");
  if (!(lr_decay > 0.0) || lr_decay > 1.0)
    throw std::invalid_argument("training: lr_decay must lie in (0, 1]");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("training: Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("training: adam_eps must be positive");
}

nlohmann::json TrainOptions::to_json() const {
  return {{"optimizer", "adam"},      {"epochs", epochs}, {"batch_size", batch_size},
          {"learning_rate", learning_rate}, {"lr_decay", lr_decay}, {"beta1", beta1},
          {"beta2", beta2},           {"adam_eps", adam_eps}, {"seed", seed}};
}

void check_compatible(const MionetModel& model, const Dataset& data) {
  data.validate();
  if (data.dim != model.dim()) throw DimensionError("dataset and model dimensions differ");
  if (data.k_sensors.size() != model.k_sensors().size() ||
      data.f_sensors.size() != model.f_sensors().size())
    throw DimensionError("dataset sensor counts (" + std::to_string(data.k_sensors.size()) + ", " +
                         std::to_string(data.f_sensors.size()) +
                         ") do not match the model's branch inputs (" +
                         std::to_string(model.k_sensors().size()) + ", " +
                         std::to_string(model.f_sensors().size()) + ")");
}

TrainResult train(const Dataset& data, const MionetArchitecture& arch, const TrainOptions& options,
                  const EpochCallback& on_epoch) {
  TrainResult res;
  res.model = MionetModel(arch, data.k_sensors, data.f_sensors);
  res.model.initialize(options.seed);
  continue_training(res.model, res.adam, data, options, res.loss_history, on_epoch);
  return res;
}

void continue_training(MionetModel& model, AdamState& adam, const Dataset& data,
                       const TrainOptions& options, std::vector<double>& loss_history,
                       const EpochCallback& on_epoch) {
  options.validate();
  check_compatible(model, data);
  if (data.size() == 0) throw std::invalid_argument("training: dataset is empty");
  init_adam(model, adam);

  const Matrix queries = model.query_matrix(data.query_points);
  std::mt19937_64 rng(options.seed ^ (0x9e3779b97f4a7c15ULL * (adam.step + 1)));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double lr = options.learning_rate * std::pow(options.lr_decay, static_cast<double>(adam.epoch));

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      const Matrix kb = gather_rows(data.k_samples, order, begin, end);
      const Matrix fb = gather_rows(data.f_samples, order, begin, end);
      const Matrix tb = gather_rows(data.targets, order, begin, end);
      MionetGrads grads = model.zero_grads();
      const double loss = model.loss_and_grad(kb, fb, queries, tb, &grads);
      if (!std::isfinite(loss))
        throw NumericalError("training: non-finite loss at optimizer step " + std::to_string(adam.step + 1));
      total += loss * static_cast<double>(end - begin);

      ++adam.step;
      const double t = static_cast<double>(adam.step);
      const double c1 = 1.0 - std::pow(options.beta1, t);
      const double c2 = 1.0 - std::pow(options.beta2, t);
      auto params = model.parameters();
      auto gblocks = MionetModel::gradient_blocks(grads);
      for (std::size_t b = 0; b < params.size(); ++b) {
        Eigen::Map<Vector> p(params[b].data(), static_cast<Eigen::Index>(params[b].size()));
        Eigen::Map<const Vector> g(gblocks[b].data(), static_cast<Eigen::Index>(gblocks[b].size()));
        adam.m[b] = options.beta1 * adam.m[b] + (1.0 - options.beta1) * g;
        adam.v[b] = options.beta2 * adam.v[b] + (1.0 - options.beta2) * g.cwiseAbs2();
        p.array() -= lr * (adam.m[b].array() / c1) /
                     ((adam.v[b].array() / c2).sqrt() + options.adam_eps);
      }
    }
    const double mean = total / static_cast<double>(order.size());
    loss_history.push_back(mean);
    lr *= options.lr_decay;
    ++adam.epoch;
    if (on_epoch && !on_epoch(loss_history.size() - 1, mean)) break;
  }
}

double evaluate_loss(const MionetModel& model, const Dataset& data) {
  check_compatible(model, data);
  if (data.size() == 0) return 0.0;
  return model.loss_and_grad(data.k_samples, data.f_samples, model.query_matrix(data.query_points),
                             data.targets, nullptr);
}

double relative_l2_error(const MionetModel& model, const Dataset& data) {
  check_compatible(model, data);
  if (data.size() == 0) return 0.0;
  const Matrix pred =
      model.forward_batch(data.k_samples, data.f_samples, model.query_matrix(data.query_points));
  double sum = 0.0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    const double denom = data.targets.row(r).norm();
    sum += (pred.row(r) - data.targets.row(r)).norm() / std::max(denom, 1e-300);
  }
  return sum / static_cast<double>(pred.rows());
}

double grad_check(const MionetModel& model, const Dataset& data, std::size_t record, double epsilon,
                  std::size_t num_params, std::uint64_t seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-4))
    throw std::invalid_argument("grad_check: epsilon must lie in [1e-7, 1e-4]");
  check_compatible(model, data);
  if (record >= data.size()) throw std::out_of_range("grad_check: record index out of range");
  const auto r = static_cast<Eigen::Index>(record);
  const Matrix kb = data.k_samples.row(r);
  const Matrix fb = data.f_samples.row(r);
  const Matrix tb = data.targets.row(r);
  const Matrix q = model.query_matrix(data.query_points);

  MionetModel work = model;
  MionetGrads grads = work.zero_grads();
  work.loss_and_grad(kb, fb, q, tb, &grads);
  auto params = work.parameters();
  auto gblocks = MionetModel::gradient_blocks(grads);

  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t b = 0; b < params.size(); ++b)
    for (std::size_t i = 0; i < params[b].size(); ++i) all.emplace_back(b, i);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(num_params, all.size()));

  double worst = 0.0;
  for (const auto& [b, i] : all) {
    double& p = params[b][i];
    const double saved = p;
    p = saved + epsilon;
    const long double lp = loss_ext(work, kb, fb, q, tb);
    p = saved - epsilon;
    const long double lm = loss_ext(work, kb, fb, q, tb);
    p = saved;
    // Exact width of the perturbed interval as stored in double.
    const long double width =
        static_cast<long double>(saved + epsilon) - static_cast<long double>(saved - epsilon);
    const auto fd = static_cast<double>((lp - lm) / width);
    const double g = gblocks[b][i];
    worst = std::max(worst, std::abs(g - fd) / std::max(std::abs(g), 1e-8));
  }
  return worst;
}

}  // namespace hybrid
