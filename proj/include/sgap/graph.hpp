#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sgap/types.hpp"

namespace sgap {

/// Compressed sparse row graph. Rows are sorted and duplicate free; an empty
/// `edge_weight` means every stored edge has weight 1.
struct GraphCSR {
  std::size_t num_nodes = 0;
  std::vector<std::uint64_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> edge_weight;

  std::size_t nnz() const noexcept { return col_idx.size(); }
  bool weighted() const noexcept { return !edge_weight.empty(); }

  std::span<const std::uint32_t> neighbors(std::size_t v) const {
    return {col_idx.data() + row_ptr[v], col_idx.data() + row_ptr[v + 1]};
  }
  std::span<const double> weights(std::size_t v) const {
    return {edge_weight.data() + row_ptr[v], edge_weight.data() + row_ptr[v + 1]};
  }
  double weight_at(std::size_t e) const { return weighted() ? edge_weight[e] : 1.0; }
  std::size_t degree(std::size_t v) const { return row_ptr[v + 1] - row_ptr[v]; }

  bool operator==(const GraphCSR&) const = default;
};

/// Builds a symmetric, duplicate-free CSR from an undirected edge list.
/// Self-loops are dropped; every endpoint must be < num_nodes.
GraphCSR from_edges(std::size_t num_nodes,
                    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

/// Parses "u v" lines (tab or space separated, 0-based). Blank lines and lines
/// starting with '#' are skipped. When `num_nodes` is absent it is inferred as
/// max index + 1.
GraphCSR load_edge_list(std::string_view text, std::optional<std::size_t> num_nodes = std::nullopt);
GraphCSR load_edge_list_file(const std::filesystem::path& path,
                             std::optional<std::size_t> num_nodes = std::nullopt);
void save_edge_list_file(const GraphCSR& g, const std::filesystem::path& path);

/// Throws InvariantError if `g` breaks any CSR / symmetry / weight invariant.
void validate(const GraphCSR& g);

/// d̃_v = deg(v) + 1, the degree under Ã = I + A.
VectorXd augmented_degrees(const GraphCSR& g);

/// Same sparsity as `g`, weight of (u, v) = |N(u) ∩ N(v)|.
GraphCSR count_edge_triangles(const GraphCSR& g);

/// Number of connected components (union-find).
std::size_t connected_components(const GraphCSR& g);

// Binary cache: "SGAPG1", u64 num_nodes, u64 nnz, u64 row_ptr[n+1],
// u64 col_idx[nnz], f64 weights[nnz]; all little-endian.
void save_graph_binary(const GraphCSR& g, const std::filesystem::path& path);
GraphCSR load_graph_binary(const std::filesystem::path& path);

/// FNV-1a over the CSR arrays; stable across runs and platforms of equal endianness.
std::uint64_t content_hash(const GraphCSR& g);

}  // namespace sgap
