#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgap/propagation.hpp"
#include "sgap/types.hpp"

namespace sgap {

enum class MessageAggregator { None, Mean, Max, Concatenate, Weighted, Adaptive };

std::string_view to_string(MessageAggregator ma);
MessageAggregator parse_message_aggregator(std::string_view name);

using Rng = std::mt19937_64;

/// z = a·weight + bias, weight is (fan_in × fan_out).
struct Layer {
  Matrix weight;
  VectorXd bias;
};

struct ModelParams {
  std::vector<Layer> layers;
  std::optional<VectorXd> gate_s;  // present iff the aggregator is Adaptive
  int hidden_dim = 64;
  double dropout = 0.5;
  double weighted_beta = 0.5;

  Eigen::Index input_width() const { return layers.front().weight.rows(); }
  Eigen::Index num_classes() const { return layers.back().weight.cols(); }
};

/// Width of the combined message for `kind` over a stack with k_pre steps.
Eigen::Index combined_width(MessageAggregator kind, Eigen::Index dim, std::size_t k_pre);

struct ModelShape {
  MessageAggregator aggregator = MessageAggregator::None;
  Eigen::Index feature_dim = 0;
  std::size_t k_pre = 0;
  int k_trans = 1;
  Eigen::Index num_classes = 2;
  int hidden_dim = 64;
  double dropout = 0.5;
  double weighted_beta = 0.5;
};

/// Glorot-uniform weights, zero biases, zero gate (every gate starts at 0.5).
ModelParams init_params(const ModelShape& shape, Rng& rng);

struct TrainConfig {
  double learning_rate = 1e-2;
  int max_epochs = 400;
  int patience = 20;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int hidden_dim = 64;
  double dropout = 0.5;
  double weighted_beta = 0.5;

  void validate() const;
};

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct CombinedMessages {
  Matrix combined;
  std::optional<Matrix> gates;  // n × (k+1) retainment scores, Adaptive only
  std::vector<Eigen::Index> max_step;  // Max only: winning step per entry, row-major
};

CombinedMessages combine_messages(MessageAggregator kind, const MessageStack& stack,
                                  const ModelParams& params);

struct ForwardCache {
  std::vector<Matrix> inputs;          // input of every layer; inputs[0] is c
  std::vector<Matrix> pre_activation;  // z of every layer
  std::vector<Matrix> dropout_scale;   // hidden layers only; empty when not training
};

/// Softmax class distribution per row. Dropout is active only when `rng` is
/// given and `training` is set.
std::pair<Matrix, ForwardCache> mlp_forward(const ModelParams& params, const Matrix& c, bool training,
                                            Rng* rng = nullptr);

struct Gradients {
  std::vector<Layer> layers;
  std::optional<VectorXd> gate_s;
};

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

/// Mean cross-entropy over `mask` plus weight_decay·½‖W‖² over the layer
/// weights. Repeated mask entries count repeatedly.
LossAndGrads loss_and_grads(const ModelParams& params, const MessageStack& stack, MessageAggregator kind,
                            std::span<const std::int32_t> labels, std::span<const std::size_t> mask,
                            double weight_decay, bool training = false, Rng* rng = nullptr);

/// Inference: combine then MLP with dropout disabled.
Matrix predict(const ModelParams& params, const MessageStack& stack, MessageAggregator kind);

/// Fraction of masked rows whose argmax equals the label; ties go to the
/// smallest class index.
double accuracy(const Matrix& predictions, std::span<const std::int32_t> labels,
                std::span<const std::size_t> mask);

std::int32_t argmax_row(const Matrix& m, Eigen::Index row);

class Adam {
 public:
  Adam(const ModelParams& like, double lr, double beta1, double beta2, double eps);
  void step(ModelParams& params, const Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Gradients m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainedModel {
  ModelParams params;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;
  std::vector<EpochRecord> log;
};

/// Full-batch Adam with early stopping on validation accuracy; returns the
/// parameters of the best validation epoch.
TrainedModel train(const MessageStack& stack, MessageAggregator kind, std::span<const std::int32_t> labels,
                   const Splits& splits, ModelParams params_init, const TrainConfig& cfg);

struct AsyncTrainOptions {
  std::size_t workers = 2;
  std::size_t minibatch_size = 64;
};

/// Multi-worker minibatch training. Each worker copies a consistent parameter
/// snapshot per minibatch and applies its update atomically; the order of
/// updates between workers is unspecified.
TrainedModel train_async(const MessageStack& stack, MessageAggregator kind,
                         std::span<const std::int32_t> labels, const Splits& splits, ModelParams params_init,
                         const TrainConfig& cfg, const AsyncTrainOptions& options);

// "SGAPW1", u64 layers, per layer u64 rows, u64 cols, f64 weight row-major,
// f64 bias[cols]; then u64 gate length and f64 gate.
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);
std::vector<char> serialize_model(const ModelParams& params);

void write_epoch_log(const std::vector<EpochRecord>& log, const std::filesystem::path& path);

}  // namespace sgap
