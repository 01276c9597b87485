#include "nomafl/flcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nomafl/error.hpp"

namespace nomafl {

namespace {

using Matrix = Eigen::MatrixXd;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

struct Workspace {
  Matrix input;                      // features x batch
  std::vector<Matrix> activations;   // post-ReLU hidden outputs, then logits
  std::vector<Matrix> deltas;
};

void gather(const Samples& data, std::span<const std::size_t> batch, Matrix& out) {
  const auto dim = static_cast<Eigen::Index>(data.feature_dim);
  out.resize(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto row = data.row(batch[j]);
    out.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXf>(row.data(), dim).cast<double>();
  }
}

void check_compatible(const ModelParams& model, const Samples& data) {
  if (model.theta.size() != model.arch.param_count()) {
    throw DomainError("model parameter vector does not match its architecture");
  }
  if (data.feature_dim != static_cast<std::size_t>(model.arch.inputs())) {
    throw DomainError("feature dimension does not match the model input layer");
  }
}

// Logits for the columns of ws.input; ws.activations.back() holds them.
void forward(const Architecture& arch, const double* theta, Workspace& ws) {
  const std::size_t layers = arch.layers.size() - 1;
  ws.activations.resize(layers);
  const Matrix* in = &ws.input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto fan_in = arch.layers[l];
    const auto fan_out = arch.layers[l + 1];
    ConstMatrixMap w(theta + offset, fan_out, fan_in);
    offset += static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
    ConstVectorMap b(theta + offset, fan_out);
    offset += static_cast<std::size_t>(fan_out);

    Matrix& out = ws.activations[l];
    out.noalias() = w * *in;
    out.colwise() += b;
    if (l + 1 < layers) out = out.cwiseMax(0.0);
    in = &out;
  }
}

// Turns logits into probabilities in place and returns the summed loss.
double softmax_xent(Matrix& logits, std::span<const int> labels) {
  double loss = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    auto col = logits.col(j);
    const double peak = col.maxCoeff();
    col = (col.array() - peak).exp();
    const double z = col.sum();
    col /= z;
    loss -= std::log(std::max(col(labels[static_cast<std::size_t>(j)]), 1e-300));
  }
  return loss;
}

double forward_backward(const Architecture& arch, const double* theta, double* grad,
                        std::span<const int> labels, Workspace& ws) {
  forward(arch, theta, ws);
  const std::size_t layers = arch.layers.size() - 1;
  Matrix& probs = ws.activations.back();
  const auto n = static_cast<double>(probs.cols());
  const double loss = softmax_xent(probs, labels) / n;

  ws.deltas.resize(layers);
  Matrix& top = ws.deltas[layers - 1];
  top = probs;
  for (Eigen::Index j = 0; j < top.cols(); ++j) top(labels[static_cast<std::size_t>(j)], j) -= 1.0;
  top /= n;

  // Offsets of each layer's weights, walked back to front.
  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += static_cast<std::size_t>(arch.layers[l]) * static_cast<std::size_t>(arch.layers[l + 1]) +
              static_cast<std::size_t>(arch.layers[l + 1]);
  }
  for (std::size_t l = layers; l-- > 0;) {
    const auto fan_in = arch.layers[l];
    const auto fan_out = arch.layers[l + 1];
    const Matrix& in = l == 0 ? ws.input : ws.activations[l - 1];
    const Matrix& delta = ws.deltas[l];
    MatrixMap gw(grad + offsets[l], fan_out, fan_in);
    VectorMap gb(grad + offsets[l] + static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out),
                 fan_out);
    gw.noalias() = delta * in.transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      ConstMatrixMap w(theta + offsets[l], fan_out, fan_in);
      Matrix& below = ws.deltas[l - 1];
      below.noalias() = w.transpose() * delta;
      // ReLU derivative: pass gradient where the activation was positive.
      below = (in.array() > 0.0).select(below, 0.0);
    }
  }
  return loss;
}

}  // namespace

std::size_t Architecture::param_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    total += static_cast<std::size_t>(layers[l]) * static_cast<std::size_t>(layers[l + 1]) +
             static_cast<std::size_t>(layers[l + 1]);
  }
  return total;
}

void Architecture::validate() const {
  if (layers.size() < 2) {
    throw DomainError("architecture needs an input and an output layer");
  }
  for (int width : layers) {
    if (width < 1) throw DomainError("architecture layer widths must be positive");
  }
  if (layers.back() < 2) {
    throw DomainError("architecture needs at least two output classes");
  }
}

ModelParams init_model(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  ModelParams model{arch, std::vector<double>(arch.param_count(), 0.0)};
  Rng rng = make_stream(seed, StreamTag::kModelInit);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < arch.layers.size(); ++l) {
    const auto fan_in = static_cast<std::size_t>(arch.layers[l]);
    const auto fan_out = static_cast<std::size_t>(arch.layers[l + 1]);
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) model.theta[offset + i] = he(rng);
    offset += fan_in * fan_out + fan_out;
  }
  return model;
}

LossGrad loss_and_grad(const ModelParams& model, const Samples& data,
                       std::span<const std::size_t> batch) {
  check_compatible(model, data);
  if (batch.empty()) {
    throw DomainError("loss_and_grad: empty batch");
  }
  Workspace ws;
  gather(data, batch, ws.input);
  std::vector<int> labels(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    labels[j] = data.labels[batch[j]];
    if (labels[j] < 0 || labels[j] >= model.arch.outputs()) {
      throw DomainError("loss_and_grad: label outside the output layer");
    }
  }
  LossGrad out;
  out.grad.assign(model.theta.size(), 0.0);
  out.loss = forward_backward(model.arch, model.theta.data(), out.grad.data(), labels, ws);
  return out;
}

LossGrad loss_and_grad(const ModelParams& model, const Samples& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return loss_and_grad(model, data, all);
}

LocalUpdate local_train(const ModelParams& global, const Samples& shard,
                        const TrainOptions& options, Rng& rng, int user_id) {
  check_compatible(global, shard);
  if (shard.size() == 0) throw DomainError("local_train: empty shard");
  if (options.epochs < 1) throw DomainError("local_train: epochs must be >= 1");
  if (options.batch_size < 1) throw DomainError("local_train: batch size must be >= 1");
  for (int label : shard.labels) {
    if (label < 0 || label >= global.arch.outputs()) {
      throw DomainError("local_train: label outside the output layer");
    }
  }

  std::vector<double> theta = global.theta;
  std::vector<double> grad(theta.size());
  VectorMap theta_v(theta.data(), static_cast<Eigen::Index>(theta.size()));
  VectorMap grad_v(grad.data(), static_cast<Eigen::Index>(grad.size()));
  Workspace ws;
  std::vector<std::size_t> order(shard.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> labels;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const auto batch =
          std::span(order).subspan(start, std::min(options.batch_size, order.size() - start));
      gather(shard, batch, ws.input);
      labels.resize(batch.size());
      for (std::size_t j = 0; j < batch.size(); ++j) labels[j] = shard.labels[batch[j]];
      forward_backward(global.arch, theta.data(), grad.data(), labels, ws);
      theta_v -= options.learning_rate * grad_v;
    }
  }

  LocalUpdate out;
  out.user_id = user_id;
  out.dataset_size = shard.size();
  out.epochs_run = options.epochs;
  out.delta.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out.delta[i] = theta[i] - global.theta[i];
  return out;
}

std::vector<double> aggregate(std::span<const double> theta,
                              std::span<const WeightedDelta> updates) {
  if (updates.empty()) throw DomainError("aggregate: no updates");
  double total = 0.0;
  for (const auto& u : updates) {
    if (u.delta.size() != theta.size()) throw DomainError("aggregate: dimension mismatch");
    total += static_cast<double>(u.dataset_size);
  }
  if (!(total > 0.0)) throw DomainError("aggregate: total dataset size is zero");

  std::vector<double> out(theta.begin(), theta.end());
  for (const auto& u : updates) {
    const double w = static_cast<double>(u.dataset_size) / total;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * u.delta[i];
  }
  return out;
}

namespace {

struct Score {
  double accuracy;
  double loss;
};

Score score(const ModelParams& model, const Samples& data) {
  check_compatible(model, data);
  if (data.size() == 0) throw DomainError("evaluate: empty test split");
  constexpr std::size_t kChunk = 256;
  Workspace ws;
  std::size_t correct = 0;
  double loss = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, data.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    gather(data, idx, ws.input);
    forward(model.arch, model.theta.data(), ws);
    Matrix& logits = ws.activations.back();
    for (std::size_t j = 0; j < n; ++j) {
      Eigen::Index best = 0;
      logits.col(static_cast<Eigen::Index>(j)).maxCoeff(&best);
      if (best == data.labels[start + j]) ++correct;
    }
    loss += softmax_xent(logits, std::span(data.labels).subspan(start, n));
  }
  const auto total = static_cast<double>(data.size());
  return {static_cast<double>(correct) / total, loss / total};
}

}  // namespace

double accuracy(const ModelParams& model, const Samples& data) { return score(model, data).accuracy; }

Evaluation evaluate(const ModelParams& model, const FederatedDataset& dataset,
                    std::span<const std::size_t> devices) {
  std::vector<std::size_t> chosen(devices.begin(), devices.end());
  if (chosen.empty()) {
    chosen.resize(dataset.devices.size());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  }
  if (chosen.empty()) throw DomainError("evaluate: no devices");

  Evaluation out;
  out.device_accuracy.resize(chosen.size());
  out.device_loss.resize(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const Score s = score(model, dataset.devices.at(chosen[i]).test);
    out.device_accuracy[i] = s.accuracy;
    out.device_loss[i] = s.loss;
  }
  const auto n = static_cast<double>(chosen.size());
  out.mean_accuracy = std::accumulate(out.device_accuracy.begin(), out.device_accuracy.end(), 0.0) / n;
  out.mean_loss = std::accumulate(out.device_loss.begin(), out.device_loss.end(), 0.0) / n;
  return out;
}

}  // namespace nomafl
