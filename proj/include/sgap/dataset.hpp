#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sgap/graph.hpp"
#include "sgap/model.hpp"
#include "sgap/types.hpp"

namespace sgap {

struct Dataset {
  GraphCSR graph;
  Matrix features;
  std::vector<std::int32_t> labels;
  Splits splits;
  int num_classes = 0;

  std::size_t num_nodes() const { return graph.num_nodes; }
};

/// Throws ValidationError on shape mismatch, out-of-range labels or
/// overlapping splits.
void validate(const Dataset& ds);

enum class FeatureFormat { Csv, Binary };

/// Reads graph.tsv, features.csv or features.bin, labels.csv and split.json.
/// features.bin is "PASCAF1", u64 n, u64 d, then little-endian f32 row-major.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& ds, const std::filesystem::path& dir, FeatureFormat format = FeatureFormat::Csv);

Matrix load_features_csv(const std::filesystem::path& path);
Matrix load_features_binary(const std::filesystem::path& path);
void save_features_csv(const Matrix& features, const std::filesystem::path& path);
void save_features_binary(const Matrix& features, const std::filesystem::path& path);

struct SbmParams {
  std::size_t num_nodes = 400;
  std::size_t blocks = 2;
  double p_in = 0.5;
  double p_out = 0.01;
  std::size_t feature_dim = 8;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

/// Stochastic block model: contiguous equal blocks, Bernoulli edges, features
/// drawn around a Gaussian mean per block, random 60/20/20 split.
Dataset synth_sbm(const SbmParams& params);

}  // namespace sgap
