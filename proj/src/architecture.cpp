#include "sgap/architecture.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <sstream>

#include "sgap/errors.hpp"

namespace sgap {

std::string to_string(const ArchitectureConfig& arch) {
  std::ostringstream os;
  os << "(k_pre=" << arch.k_pre << ", ga_pre=" << (arch.ga_pre ? to_string(*arch.ga_pre) : "Unused")
     << ", ma=" << to_string(arch.ma) << ", k_trans=" << arch.k_trans << ", k_post=" << arch.k_post
     << ", ga_post=" << (arch.ga_post ? to_string(*arch.ga_post) : "Unused") << ")";
  return os.str();
}

namespace space {

std::size_t graph_aggregator_index(const GraphAggregator& ga) {
  auto it = std::find(kGraphAggregators.begin(), kGraphAggregators.end(), ga);
  if (it == kGraphAggregators.end()) {
    throw ValidationError("graph aggregator " + to_string(ga) +
                          " is not in the design space (AugNA, PPR(0.1|0.2|0.3), TriangleIA)");
  }
  return static_cast<std::size_t>(it - kGraphAggregators.begin());
}

std::size_t message_aggregator_index(MessageAggregator ma) {
  auto it = std::find(kMessageAggregators.begin(), kMessageAggregators.end(), ma);
  return static_cast<std::size_t>(it - kMessageAggregators.begin());
}

}  // namespace space

namespace {

void check_stage(const char* name, int steps, int max_steps, const std::optional<GraphAggregator>& ga) {
  if (steps < 0 || steps > max_steps) {
    throw ValidationError(std::string(name) + " steps " + std::to_string(steps) + " outside [0, " +
                          std::to_string(max_steps) + "]");
  }
  if (ga) space::graph_aggregator_index(*ga);
  if (steps > 0 && !ga) throw ValidationError(std::string(name) + " has steps but no graph aggregator");
}

// Stage option index: 0 for no steps, else 1 + (steps-1)*5 + aggregator.
std::size_t stage_index(int steps, const std::optional<GraphAggregator>& ga) {
  if (steps == 0) return 0;
  return 1 + static_cast<std::size_t>(steps - 1) * space::kGraphAggregators.size() +
         space::graph_aggregator_index(*ga);
}

std::pair<int, std::optional<GraphAggregator>> stage_at(std::size_t index) {
  if (index == 0) return {0, std::nullopt};
  const std::size_t i = index - 1;
  return {static_cast<int>(i / space::kGraphAggregators.size()) + 1,
          space::kGraphAggregators[i % space::kGraphAggregators.size()]};
}

}  // namespace

ArchitectureConfig canonicalize(ArchitectureConfig raw) {
  check_stage("pre-processing", raw.k_pre, space::kMaxPreSteps, raw.ga_pre);
  check_stage("post-processing", raw.k_post, space::kMaxPostSteps, raw.ga_post);
  if (raw.k_trans < 1 || raw.k_trans > space::kMaxTransSteps) {
    throw ValidationError("k_trans " + std::to_string(raw.k_trans) + " outside [1, 10]");
  }
  if (raw.k_pre == 0) raw.ga_pre.reset();
  if (raw.k_post == 0) raw.ga_post.reset();
  return raw;
}

bool is_canonical(const ArchitectureConfig& arch) {
  try {
    return canonicalize(arch) == arch;
  } catch (const ValidationError&) {
    return false;
  }
}

std::size_t index_of(const ArchitectureConfig& arch) {
  if (!is_canonical(arch)) throw ValidationError("config is not canonical: " + to_string(arch));
  std::size_t idx = stage_index(arch.k_pre, arch.ga_pre);
  idx = idx * space::kMessageAggregators.size() + space::message_aggregator_index(arch.ma);
  idx = idx * space::kMaxTransSteps + static_cast<std::size_t>(arch.k_trans - 1);
  idx = idx * space::kStageChoices + stage_index(arch.k_post, arch.ga_post);
  return idx;
}

ArchitectureConfig config_at(std::size_t index) {
  if (index >= space::kCanonicalSize) throw RangeError("design-space index out of range");
  ArchitectureConfig arch;
  std::tie(arch.k_post, arch.ga_post) = stage_at(index % space::kStageChoices);
  index /= space::kStageChoices;
  arch.k_trans = static_cast<int>(index % space::kMaxTransSteps) + 1;
  index /= space::kMaxTransSteps;
  arch.ma = space::kMessageAggregators[index % space::kMessageAggregators.size()];
  index /= space::kMessageAggregators.size();
  std::tie(arch.k_pre, arch.ga_pre) = stage_at(index);
  return arch;
}

std::vector<std::string_view> preset_names() {
  return {"sgc", "sign", "s2gc", "gbp", "pasca-appnp", "pasca-v1", "pasca-v2", "pasca-v3"};
}

Preset preset(std::string_view name) {
  using GA = GraphAggregator;
  using MA = MessageAggregator;
  if (name == "sgc") {
    return {{2, GA::aug_na(), MA::None, 1, 0, std::nullopt}, "SGC: K_pre=2 feature smoothing, linear classifier"};
  }
  if (name == "sign") {
    return {{3, GA::aug_na(), MA::Concatenate, 1, 0, std::nullopt},
            "SIGN: concatenated multi-hop features; graph aggregator is free, AugNA by default"};
  }
  if (name == "s2gc") {
    return {{10, GA::ppr(0.1), MA::Mean, 1, 0, std::nullopt}, "S2GC: averaged PPR-style diffusion"};
  }
  if (name == "gbp") {
    return {{4, GA::aug_na(), MA::Weighted, 2, 0, std::nullopt},
            "GBP: beta(1-beta)^i weighted propagation, K_trans >= 2 (default 2)"};
  }
  if (name == "pasca-appnp") {
    return {{0, std::nullopt, MA::None, 2, 10, GA::ppr(0.1)},
            "PaSca-APPNP: MLP on raw features, PPR post-processing of predictions"};
  }
  if (name == "pasca-v1") {
    return {{3, GA::ppr(0.1), MA::Weighted, 2, 0, std::nullopt}, "PaSca-V1: searched, low inference cost"};
  }
  if (name == "pasca-v2") {
    return {{6, GA::aug_na(), MA::Adaptive, 2, 0, std::nullopt}, "PaSca-V2: searched, adaptive gating"};
  }
  if (name == "pasca-v3") {
    return {{6, GA::aug_na(), MA::Adaptive, 3, 4, GA::ppr(0.3)},
            "PaSca-V3: searched, best accuracy, PPR(0.3) post-processing"};
  }
  std::string valid;
  for (auto n : preset_names()) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw ConfigError("unknown preset '" + std::string(name) + "'; valid names: " + valid);
}

CostScope parse_cost_scope(std::string_view name) {
  if (name == "full") return CostScope::Full;
  if (name == "online") return CostScope::Online;
  throw ConfigError("unknown cost scope '" + std::string(name) + "' (expected full or online)");
}

std::uint64_t inference_cost(const ArchitectureConfig& arch, const CostModelSizes& s, CostScope scope) {
  const auto k_pre = static_cast<std::uint64_t>(arch.k_pre);
  const auto k_post = static_cast<std::uint64_t>(arch.k_post);
  const auto k_trans = static_cast<std::uint64_t>(arch.k_trans);
  std::uint64_t cost = 0;
  if (scope == CostScope::Full) cost += k_pre * s.nnz * s.feature_dim;

  std::uint64_t input_width = s.feature_dim;
  switch (arch.ma) {
    case MessageAggregator::None: break;
    case MessageAggregator::Concatenate: input_width = s.feature_dim * (k_pre + 1); break;
    default: cost += s.num_nodes * s.feature_dim * (k_pre + 1); break;
  }

  std::uint64_t mlp = 0;
  if (k_trans == 1) {
    mlp = input_width * s.num_classes;
  } else {
    mlp = input_width * s.hidden_dim + (k_trans - 2) * s.hidden_dim * s.hidden_dim + s.hidden_dim * s.num_classes;
  }
  cost += s.num_nodes * mlp;
  cost += k_post * s.nnz * s.num_classes;
  return cost;
}

double CostRange::normalize(std::uint64_t cost) const {
  if (max <= min) return 0.0;
  const double x = static_cast<double>(cost - std::min(cost, min)) / static_cast<double>(max - min);
  return std::clamp(x, 0.0, 1.0);
}

CostRange design_space_cost_range(const CostModelSizes& sizes, CostScope scope) {
  CostRange r{std::numeric_limits<std::uint64_t>::max(), 0};
  for (const ArchitectureConfig& arch : enumerate_space()) {
    const std::uint64_t c = inference_cost(arch, sizes, scope);
    r.min = std::min(r.min, c);
    r.max = std::max(r.max, c);
  }
  return r;
}

}  // namespace sgap
