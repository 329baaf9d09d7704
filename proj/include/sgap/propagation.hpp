#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "sgap/operator.hpp"
#include "sgap/types.hpp"

namespace sgap {

/// Messages m^0..m^k for every node. steps[0] is the untouched input.
struct MessageStack {
  std::vector<Matrix> steps;

  std::size_t k() const { return steps.empty() ? 0 : steps.size() - 1; }
  Eigen::Index num_nodes() const { return steps.empty() ? 0 : steps.front().rows(); }
  Eigen::Index dim() const { return steps.empty() ? 0 : steps.front().cols(); }
  const Matrix& last() const { return steps.back(); }

  /// The first `k + 1` steps.
  MessageStack prefix(std::size_t k) const;

  bool operator==(const MessageStack& other) const;
};

/// out = base · prev, plus the restart term α·origin + (1−α)·(base · prev) for PPR.
Matrix apply_step(const PropagationOperator& op, const Matrix& prev, const Matrix& origin);

struct PropagateOptions {
  std::size_t workers = 1;
  std::size_t batch_size = 0;  // 0: ceil(n / (4 * workers))
  std::size_t memory_budget_bytes = std::numeric_limits<std::size_t>::max();
};

/// k aggregation steps over row batches processed in parallel. Every output row
/// is accumulated in CSR order from the read-only previous step, so the result
/// is bitwise independent of `workers` and `batch_size`.
MessageStack propagate(const PropagationOperator& op, const Matrix& m0, std::size_t k,
                       const PropagateOptions& options = {});

std::size_t stack_bytes(Eigen::Index n, Eigen::Index dim, std::size_t k);

// "SGAPM1", u64 n, u64 dim, u64 k, then k+1 row-major f64 matrices.
void save_stack(const MessageStack& stack, const std::filesystem::path& path);
MessageStack load_stack(const std::filesystem::path& path);

std::uint64_t content_hash(const Matrix& m);

/// Reuses pre-processing stacks across evaluations. One entry per
/// (graph, operator, input) holds the deepest stack computed so far; any
/// request for a shallower k is served by its prefix. Thread-safe.
/// With a directory set, entries are also persisted as SGAPM1 files.
class PropagationCache {
 public:
  explicit PropagationCache(std::optional<std::filesystem::path> dir = std::nullopt);

  /// Directory from the SGAP_CACHE_DIR environment variable, if set.
  static PropagationCache from_environment();

  MessageStack get(const GraphCSR& g, const GraphAggregator& kind, const OperatorOptions& op_options,
                   const Matrix& m0, std::size_t k, const PropagateOptions& options = {});

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Key = std::tuple<std::uint64_t, int, std::uint64_t, bool, std::uint64_t>;
  struct Entry {
    std::shared_ptr<const MessageStack> stack;
  };
  std::filesystem::path file_for(const Key& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<Key, Entry> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace sgap
