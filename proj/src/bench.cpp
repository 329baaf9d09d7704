#include "sgap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "sgap/errors.hpp"
#include "sgap/propagation.hpp"

namespace sgap {

std::vector<ScalingRow> bench_scaling(const Dataset& data, const ArchitectureConfig& raw_arch,
                                      const std::vector<std::size_t>& workers, std::size_t repeats) {
  const ArchitectureConfig arch = canonicalize(raw_arch);
  if (workers.empty()) throw ValidationError("workers list is empty");
  for (std::size_t w : workers) {
    if (w < 1) throw ValidationError("worker counts must be >= 1");
  }
  const GraphAggregator ga = arch.ga_pre.value_or(GraphAggregator::aug_na());
  const std::size_t k = static_cast<std::size_t>(std::max(arch.k_pre, 1));
  const PropagationOperator op = build_operator(data.graph, ga);

  std::vector<ScalingRow> rows;
  MessageStack reference;
  for (std::size_t w : workers) {
    ScalingRow row;
    row.workers = w;
    row.seconds = std::numeric_limits<double>::infinity();
    MessageStack stack;
    for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      stack = propagate(op, data.features, k, PropagateOptions{w});
      row.seconds = std::min(row.seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    if (rows.empty()) {
      reference = std::move(stack);
    } else {
      row.identical = stack == reference;
      row.speedup = row.seconds > 0.0 ? rows.front().seconds / row.seconds : 1.0;
    }
    if (!std::isfinite(row.speedup) || row.speedup < 0.0) row.speedup = 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sgap
