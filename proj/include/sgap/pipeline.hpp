#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgap/architecture.hpp"
#include "sgap/dataset.hpp"
#include "sgap/model.hpp"
#include "sgap/propagation.hpp"

namespace sgap {

struct WallTimes {
  double pre = 0.0;
  double train = 0.0;
  double post = 0.0;
};

/// Mean Adaptive retainment score per step, averaged over nodes whose degree
/// falls into each bucket.
struct GateHeatmap {
  std::vector<std::string> buckets;
  std::vector<std::vector<double>> mean_gate;  // [bucket][step]
};

struct EvalResult {
  ArchitectureConfig config;
  double val_error = 1.0;  // 1 − validation accuracy of the final predictions
  double test_accuracy = 0.0;
  std::uint64_t inference_cost = 0;
  double normalized_cost = 0.0;
  WallTimes wall_times;
  std::optional<GateHeatmap> gate_heatmap;
  int best_epoch = 0;
};

struct RunOptions {
  PropagateOptions propagation;
  OperatorOptions op;
  PropagationCache* cache = nullptr;  // pre-processing reuse across runs
  CostScope cost_scope = CostScope::Full;
  std::size_t train_workers = 1;  // > 1 switches to the asynchronous trainer
  std::size_t minibatch_size = 64;
};

struct SgapRun {
  EvalResult result;
  TrainedModel model;
  Matrix stage2_predictions;  // soft predictions h_v
  Matrix final_predictions;   // m^{K_post}
};

/// Pre-process features, train the combiner + MLP, post-process predictions.
SgapRun run_sgap_detailed(const Dataset& data, const ArchitectureConfig& arch, const TrainConfig& cfg,
                          const RunOptions& options = {});

EvalResult run_sgap(const Dataset& data, const ArchitectureConfig& arch, const TrainConfig& cfg,
                    const RunOptions& options = {});

CostModelSizes cost_sizes(const Dataset& data, int hidden_dim);

GateHeatmap gate_heatmap(const Matrix& gates, const GraphCSR& graph);

}  // namespace sgap
