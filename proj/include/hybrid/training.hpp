/// @file training.hpp
/// @brief Mini-batch Adam training and gradient checking for MionetModel.

#pragma once

#include "hybrid/dataset.hpp"
#include "hybrid/mionet.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace hybrid {

struct TrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  /// Multiplies the learning rate after every epoch.
  double lr_decay = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct TrainResult {
  MionetModel model;
  AdamState adam;
  /// Mean training loss of each epoch.
  std::vector<double> loss_history;
};

/// Called after each epoch with (epoch index, mean loss); return false to
/// stop early.
using EpochCallback = std::function<bool(std::size_t, double)>;

/// Builds a model from the architecture (initialized from options.seed) and
/// trains it.
TrainResult train(const Dataset& data, const MionetArchitecture& arch, const TrainOptions& options,
                  const EpochCallback& on_epoch = {});

/// Continues training an existing model with its optimizer state. The
/// shuffling stream is derived from options.seed and the optimizer step so
/// that resumed runs do not replay the first epochs' order.
void continue_training(MionetModel& model, AdamState& adam, const Dataset& data,
                       const TrainOptions& options, std::vector<double>& loss_history,
                       const EpochCallback& on_epoch = {});

/// Mean squared error of the model on every record of the dataset.
double evaluate_loss(const MionetModel& model, const Dataset& data);

/// Mean over records of ||pred - target||_2 / ||target||_2.
double relative_l2_error(const MionetModel& model, const Dataset& data);

/// Max relative difference between backprop and central differences on a
/// random subset of parameters (denominator max(|g|, 1e-8)), using the loss
/// of record `record` of the dataset.
double grad_check(const MionetModel& model, const Dataset& data, std::size_t record, double epsilon,
                  std::size_t num_params = 100, std::uint64_t seed = 0);

/// The dataset's records as a single batch, checked against the model.
void check_compatible(const MionetModel& model, const Dataset& data);

}  // namespace hybrid
