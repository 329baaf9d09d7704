#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "sgap/model.hpp"
#include "sgap/operator.hpp"

namespace sgap {

/// One point of the design space. An empty graph aggregator means "Unused".
struct ArchitectureConfig {
  int k_pre = 0;
  std::optional<GraphAggregator> ga_pre;
  MessageAggregator ma = MessageAggregator::None;
  int k_trans = 1;
  int k_post = 0;
  std::optional<GraphAggregator> ga_post;

  bool operator==(const ArchitectureConfig&) const = default;
};

std::string to_string(const ArchitectureConfig& arch);

namespace space {

inline constexpr int kMaxPreSteps = 10;
inline constexpr int kMaxTransSteps = 10;
inline constexpr int kMaxPostSteps = 10;

/// Graph aggregator choices in encoding order.
inline const std::array<GraphAggregator, 5> kGraphAggregators = {
    GraphAggregator::aug_na(), GraphAggregator::ppr(0.1), GraphAggregator::ppr(0.2), GraphAggregator::ppr(0.3),
    GraphAggregator::triangle_ia()};

inline constexpr std::array<MessageAggregator, 6> kMessageAggregators = {
    MessageAggregator::None,        MessageAggregator::Mean,     MessageAggregator::Max,
    MessageAggregator::Concatenate, MessageAggregator::Weighted, MessageAggregator::Adaptive};

// Stage options: 1 (steps = 0, Unused) + 10 step counts × 5 aggregators.
inline constexpr std::size_t kStageChoices = 1 + 10 * 5;
inline constexpr std::size_t kCanonicalSize =
    kStageChoices * kMessageAggregators.size() * kMaxTransSteps * kStageChoices;  // 156,060
inline constexpr std::size_t kRawGridSize = 11 * 5 * 6 * 10 * 11 * 5;                // 181,500

/// Position of `ga` in kGraphAggregators; throws ValidationError if absent.
std::size_t graph_aggregator_index(const GraphAggregator& ga);
std::size_t message_aggregator_index(MessageAggregator ma);

}  // namespace space

/// Validates ranges and collapses the aggregator of any zero-step stage to
/// Unused. Idempotent.
ArchitectureConfig canonicalize(ArchitectureConfig raw);
bool is_canonical(const ArchitectureConfig& arch);

/// Bijection between canonical configs and [0, kCanonicalSize), increasing in
/// lexicographic (k_pre, ga_pre, ma, k_trans, k_post, ga_post) order with
/// Unused ordered first.
std::size_t index_of(const ArchitectureConfig& arch);
ArchitectureConfig config_at(std::size_t index);

/// Lazily yields every canonical config exactly once, in index order.
inline auto enumerate_space() {
  return std::views::iota(std::size_t{0}, space::kCanonicalSize) | std::views::transform(config_at);
}

struct Preset {
  ArchitectureConfig arch;
  std::string notes;
};

std::vector<std::string_view> preset_names();
Preset preset(std::string_view name);

enum class CostScope { Full, Online };

CostScope parse_cost_scope(std::string_view name);

struct CostModelSizes {
  std::uint64_t num_nodes = 0;
  std::uint64_t nnz = 0;  // nonzeros of the aggregation operator (Ã)
  std::uint64_t feature_dim = 0;
  std::uint64_t num_classes = 0;
  std::uint64_t hidden_dim = 64;
};

/// Multiply-accumulate count of one full inference pass. Online scope drops
/// the pre-processing propagation term.
std::uint64_t inference_cost(const ArchitectureConfig& arch, const CostModelSizes& sizes,
                             CostScope scope = CostScope::Full);

struct CostRange {
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  double normalize(std::uint64_t cost) const;
};

/// Minimum and maximum of inference_cost over the whole design space.
CostRange design_space_cost_range(const CostModelSizes& sizes, CostScope scope = CostScope::Full);

}  // namespace sgap
