#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sgap/architecture.hpp"
#include "sgap/model.hpp"
#include "sgap/pipeline.hpp"
#include "sgap/search.hpp"

namespace sgap {

using Json = nlohmann::ordered_json;

/// Graph aggregators are "aug_na", "triangle_ia", {"ppr": alpha}; Unused is
/// "unused" (null is also accepted on input).
Json to_json(const std::optional<GraphAggregator>& ga);
std::optional<GraphAggregator> graph_aggregator_from_json(const Json& j);

Json to_json(const ArchitectureConfig& arch);
ArchitectureConfig architecture_from_json(const Json& j);

Json to_json(const TrainConfig& cfg);
/// Keys absent from `j` keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const Json& j);

Json to_json(const EvalResult& result, bool include_timings = false);

Json to_json(const Observation& obs, bool include_timings = false);
Json to_json(const SearchResult& result, const Objectives& ref, bool include_timings = false);

/// One row per front member: objectives, test accuracy and the config fields.
std::string front_csv(const ParetoFront& front);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sgap
