#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nomafl/data.hpp"
#include "nomafl/rng.hpp"

namespace nomafl {

// Fully connected ReLU network with a softmax output, e.g. {784, 300, 100, 10}.
struct Architecture {
  std::vector<int> layers;

  std::size_t param_count() const;
  int inputs() const { return layers.front(); }
  int outputs() const { return layers.back(); }
  void validate() const;
};

// Flat parameters; per layer the weight matrix (outputs x inputs,
// column-major) followed by the bias vector.
struct ModelParams {
  Architecture arch;
  std::vector<double> theta;
};

// He-normal weights (std = sqrt(2 / fan_in)), zero biases.
ModelParams init_model(const Architecture& arch, std::uint64_t seed);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean softmax cross-entropy over `batch` (indices into `data`) and its
// gradient.
LossGrad loss_and_grad(const ModelParams& model, const Samples& data,
                       std::span<const std::size_t> batch);
LossGrad loss_and_grad(const ModelParams& model, const Samples& data);

struct LocalUpdate {
  int user_id = 0;
  std::vector<double> delta;  // theta_local - theta_global
  std::size_t dataset_size = 0;
  int epochs_run = 0;
};

struct TrainOptions {
  int epochs = 1;
  double learning_rate = 0.001;
  std::size_t batch_size = 10;
};

// Mini-batch SGD for `epochs` full passes; each pass reshuffles from `rng`.
LocalUpdate local_train(const ModelParams& global, const Samples& shard,
                        const TrainOptions& options, Rng& rng, int user_id = 0);

struct WeightedDelta {
  std::span<const double> delta;
  std::size_t dataset_size = 0;
};

// theta + sum_k (|D_k| / sum_j |D_j|) delta_k, accumulated in input order.
std::vector<double> aggregate(std::span<const double> theta,
                              std::span<const WeightedDelta> updates);

struct Evaluation {
  std::vector<double> device_accuracy;
  std::vector<double> device_loss;
  double mean_accuracy = 0.0;  // unweighted over devices
  double mean_loss = 0.0;
};

double accuracy(const ModelParams& model, const Samples& data);

// Scores each device on its own test split. `devices` selects a subset
// (all devices when empty).
Evaluation evaluate(const ModelParams& model, const FederatedDataset& dataset,
                    std::span<const std::size_t> devices = {});

}  // namespace nomafl
