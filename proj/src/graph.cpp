#include "sgap/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "binary_io.hpp"
#include "sgap/errors.hpp"

namespace sgap {

GraphCSR from_edges(std::size_t num_nodes,
                    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::vector<std::vector<std::uint32_t>> adj(num_nodes);
  for (auto [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw RangeError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  GraphCSR g;
  g.num_nodes = num_nodes;
  g.row_ptr.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto& row = adj[v];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.row_ptr[v + 1] = g.row_ptr[v] + row.size();
  }
  g.col_idx.reserve(g.row_ptr.back());
  for (const auto& row : adj) g.col_idx.insert(g.col_idx.end(), row.begin(), row.end());
  return g;
}

namespace {

bool parse_index(std::string_view tok, std::uint64_t& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && p == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

GraphCSR load_edge_list(std::string_view text, std::optional<std::size_t> num_nodes) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::uint64_t max_index = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty() || toks.front().starts_with('#')) continue;
    std::uint64_t u = 0, v = 0;
    if (toks.size() != 2 || !parse_index(toks[0], u) || !parse_index(toks[1], v)) {
      throw ParseError("expected two non-negative node indices, got '" + std::string(line) + "'",
                       line_no);
    }
    if (num_nodes && (u >= *num_nodes || v >= *num_nodes)) {
      throw RangeError("line " + std::to_string(line_no) + ": node index " +
                       std::to_string(std::max(u, v)) + " >= num_nodes " +
                       std::to_string(*num_nodes));
    }
    if (std::max(u, v) >= std::numeric_limits<std::uint32_t>::max()) {
      throw RangeError("line " + std::to_string(line_no) + ": node index too large");
    }
    max_index = std::max({max_index, u, v});
    edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  std::size_t n = num_nodes ? *num_nodes : (edges.empty() ? 0 : max_index + 1);
  return from_edges(n, edges);
}

GraphCSR load_edge_list_file(const std::filesystem::path& path, std::optional<std::size_t> num_nodes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_edge_list(ss.str(), num_nodes);
}

void save_edge_list_file(const GraphCSR& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    for (auto v : g.neighbors(u)) {
      if (u < v) out << u << '\t' << v << '\n';
    }
  }
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

void validate(const GraphCSR& g) {
  if (g.row_ptr.size() != g.num_nodes + 1 || g.row_ptr.front() != 0 ||
      g.row_ptr.back() != g.col_idx.size()) {
    throw InvariantError("row_ptr does not frame col_idx");
  }
  if (g.weighted() && g.edge_weight.size() != g.col_idx.size()) {
    throw InvariantError("edge_weight not aligned with col_idx");
  }
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    if (g.row_ptr[v + 1] < g.row_ptr[v]) throw InvariantError("row_ptr decreasing");
    auto row = g.neighbors(v);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] >= g.num_nodes) throw InvariantError("column index out of range");
      if (i > 0 && row[i] <= row[i - 1]) throw InvariantError("row not strictly increasing");
    }
  }
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    for (std::uint64_t e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) {
      const double w = g.weight_at(e);
      if (!(w >= 0.0)) throw InvariantError("negative or NaN edge weight");
      const std::uint32_t u = g.col_idx[e];
      auto back = g.neighbors(u);
      auto it = std::lower_bound(back.begin(), back.end(), static_cast<std::uint32_t>(v));
      if (it == back.end() || *it != v) throw InvariantError("graph is not symmetric");
      const std::uint64_t be = g.row_ptr[u] + static_cast<std::uint64_t>(it - back.begin());
      if (g.weight_at(be) != w) throw InvariantError("asymmetric edge weight");
    }
  }
}

VectorXd augmented_degrees(const GraphCSR& g) {
  VectorXd d(static_cast<Eigen::Index>(g.num_nodes));
  for (std::size_t v = 0; v < g.num_nodes; ++v) d[static_cast<Eigen::Index>(v)] = static_cast<double>(g.degree(v)) + 1.0;
  return d;
}

GraphCSR count_edge_triangles(const GraphCSR& g) {
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    for (auto u : g.neighbors(v)) {
      if (u == v) throw InvariantError("self-loop at node " + std::to_string(v));
    }
  }
  GraphCSR out = g;
  out.edge_weight.assign(g.nnz(), 0.0);
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    auto nu = g.neighbors(u);
    for (std::uint64_t e = g.row_ptr[u]; e < g.row_ptr[u + 1]; ++e) {
      auto nv = g.neighbors(g.col_idx[e]);
      std::size_t common = 0;
      auto a = nu.begin();
      auto b = nv.begin();
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++common;
          ++a;
          ++b;
        }
      }
      out.edge_weight[e] = static_cast<double>(common);
    }
  }
  return out;
}

std::size_t connected_components(const GraphCSR& g) {
  std::vector<std::size_t> parent(g.num_nodes);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = g.num_nodes;
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    for (auto u : g.neighbors(v)) {
      auto a = find(v), b = find(u);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components;
}

void save_graph_binary(const GraphCSR& g, const std::filesystem::path& path) {
  detail::BinaryWriter w(path);
  w.magic("SGAPG1");
  w.u64(g.num_nodes);
  w.u64(g.nnz());
  for (auto p : g.row_ptr) w.u64(p);
  for (auto c : g.col_idx) w.u64(c);
  for (std::size_t e = 0; e < g.nnz(); ++e) w.f64(g.weight_at(e));
  w.finish();
}

GraphCSR load_graph_binary(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("SGAPG1");
  GraphCSR g;
  g.num_nodes = r.u64();
  const std::uint64_t nnz = r.u64();
  g.row_ptr.resize(g.num_nodes + 1);
  for (auto& p : g.row_ptr) p = r.u64();
  g.col_idx.resize(nnz);
  for (auto& c : g.col_idx) {
    const std::uint64_t v = r.u64();
    if (v >= g.num_nodes) throw ValidationError(path.string() + ": column index out of range");
    c = static_cast<std::uint32_t>(v);
  }
  g.edge_weight.resize(nnz);
  bool all_unit = true;
  for (auto& w : g.edge_weight) {
    w = r.f64();
    all_unit = all_unit && w == 1.0;
  }
  if (all_unit) g.edge_weight.clear();
  try {
    validate(g);
  } catch (const InvariantError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return g;
}

std::uint64_t content_hash(const GraphCSR& g) {
  detail::Fnv1a h;
  h.add_value(static_cast<std::uint64_t>(g.num_nodes));
  h.add(g.row_ptr.data(), g.row_ptr.size() * sizeof(std::uint64_t));
  h.add(g.col_idx.data(), g.col_idx.size() * sizeof(std::uint32_t));
  h.add(g.edge_weight.data(), g.edge_weight.size() * sizeof(double));
  return h.value();
}

}  // namespace sgap
