#include "sgap/pipeline.hpp"

#include <chrono>
#include <limits>

#include "sgap/errors.hpp"

namespace sgap {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CostModelSizes cost_sizes(const Dataset& data, int hidden_dim) {
  return CostModelSizes{data.graph.num_nodes, data.graph.nnz() + data.graph.num_nodes,
                        static_cast<std::uint64_t>(data.features.cols()),
                        static_cast<std::uint64_t>(data.num_classes), static_cast<std::uint64_t>(hidden_dim)};
}

GateHeatmap gate_heatmap(const Matrix& gates, const GraphCSR& graph) {
  struct Bucket {
    const char* name;
    std::size_t lo, hi;
  };
  static constexpr Bucket kBuckets[] = {{"0", 0, 0}, {"1-4", 1, 4}, {"5-8", 5, 8}, {"9-12", 9, 12},
                                        {"13+", 13, std::numeric_limits<std::size_t>::max()}};
  GateHeatmap map;
  for (const Bucket& b : kBuckets) {
    VectorXd sum = VectorXd::Zero(gates.cols());
    std::size_t count = 0;
    for (std::size_t v = 0; v < graph.num_nodes; ++v) {
      const std::size_t deg = graph.degree(v);
      if (deg < b.lo || deg > b.hi) continue;
      sum += gates.row(static_cast<Eigen::Index>(v)).transpose();
      ++count;
    }
    if (count == 0) continue;
    sum /= static_cast<double>(count);
    map.buckets.emplace_back(b.name);
    map.mean_gate.emplace_back(sum.data(), sum.data() + sum.size());
  }
  return map;
}

SgapRun run_sgap_detailed(const Dataset& data, const ArchitectureConfig& raw_arch, const TrainConfig& cfg,
                          const RunOptions& options) {
  const ArchitectureConfig arch = canonicalize(raw_arch);
  cfg.validate();
  validate(data);
  SgapRun run;
  EvalResult& result = run.result;
  result.config = arch;

  // Stage 1: the only pass over the graph before training.
  auto t0 = std::chrono::steady_clock::now();
  MessageStack stack;
  if (arch.k_pre == 0) {
    stack.steps.push_back(data.features);
  } else if (options.cache != nullptr) {
    stack = options.cache->get(data.graph, *arch.ga_pre, options.op, data.features,
                               static_cast<std::size_t>(arch.k_pre), options.propagation);
  } else {
    stack = propagate(build_operator(data.graph, *arch.ga_pre, options.op), data.features,
                      static_cast<std::size_t>(arch.k_pre), options.propagation);
  }
  result.wall_times.pre = seconds_since(t0);

  // Stage 2
  t0 = std::chrono::steady_clock::now();
  Rng init_rng(cfg.seed);
  ModelShape shape{arch.ma,        data.features.cols(), static_cast<std::size_t>(arch.k_pre),
                   arch.k_trans,   data.num_classes,     cfg.hidden_dim,
                   cfg.dropout,    cfg.weighted_beta};
  ModelParams init = init_params(shape, init_rng);
  if (options.train_workers > 1) {
    run.model = train_async(stack, arch.ma, data.labels, data.splits, std::move(init), cfg,
                            AsyncTrainOptions{options.train_workers, options.minibatch_size});
  } else {
    run.model = train(stack, arch.ma, data.labels, data.splits, std::move(init), cfg);
  }
  const CombinedMessages combined = combine_messages(arch.ma, stack, run.model.params);
  run.stage2_predictions = mlp_forward(run.model.params, combined.combined, false).first;
  if (combined.gates) result.gate_heatmap = gate_heatmap(*combined.gates, data.graph);
  result.best_epoch = run.model.best_epoch;
  result.wall_times.train = seconds_since(t0);

  // Stage 3
  t0 = std::chrono::steady_clock::now();
  if (arch.k_post == 0) {
    run.final_predictions = run.stage2_predictions;
  } else {
    const MessageStack post = propagate(build_operator(data.graph, *arch.ga_post, options.op), run.stage2_predictions,
                                        static_cast<std::size_t>(arch.k_post), options.propagation);
    run.final_predictions = post.last();
  }
  result.wall_times.post = seconds_since(t0);

  result.val_error = 1.0 - accuracy(run.final_predictions, data.labels, data.splits.val);
  result.test_accuracy =
      data.splits.test.empty() ? 0.0 : accuracy(run.final_predictions, data.labels, data.splits.test);
  const CostModelSizes sizes = cost_sizes(data, cfg.hidden_dim);
  result.inference_cost = inference_cost(arch, sizes, options.cost_scope);
  result.normalized_cost = design_space_cost_range(sizes, options.cost_scope).normalize(result.inference_cost);
  return run;
}

EvalResult run_sgap(const Dataset& data, const ArchitectureConfig& arch, const TrainConfig& cfg,
                    const RunOptions& options) {
  return run_sgap_detailed(data, arch, cfg, options).result;
}

}  // namespace sgap
