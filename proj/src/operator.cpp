#include "sgap/operator.hpp"

#include <cmath>
#include <sstream>

#include "sgap/errors.hpp"

namespace sgap {

std::string to_string(const GraphAggregator& ga) {
  switch (ga.kind) {
    case GraphAggregatorKind::AugNA: return "AugNA";
    case GraphAggregatorKind::TriangleIA: return "TriangleIA";
    case GraphAggregatorKind::PPR: {
      std::ostringstream os;
      os << "PPR(" << ga.alpha << ")";
      return os.str();
    }
  }
  return "?";
}

namespace {

// Inserts the diagonal into each sorted row of `g`. `self_weight` gives the
// diagonal weight, `edge_weight` maps (v, u, stored weight) to the new weight.
template <typename SelfWeight, typename EdgeWeight>
GraphCSR with_self_loops(const GraphCSR& g, SelfWeight self_weight, EdgeWeight edge_weight) {
  GraphCSR out;
  out.num_nodes = g.num_nodes;
  out.row_ptr.assign(g.num_nodes + 1, 0);
  out.col_idx.reserve(g.nnz() + g.num_nodes);
  out.edge_weight.reserve(g.nnz() + g.num_nodes);
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    bool placed = false;
    auto place_self = [&] {
      const double w = self_weight(v);
      if (w != 0.0) {
        out.col_idx.push_back(static_cast<std::uint32_t>(v));
        out.edge_weight.push_back(w);
      }
      placed = true;
    };
    for (std::uint64_t e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) {
      const std::uint32_t u = g.col_idx[e];
      if (u == v) throw InvariantError("input graph already has a self-loop at node " + std::to_string(v));
      if (!placed && u > v) place_self();
      const double w = edge_weight(v, u, g.weight_at(e));
      if (w != 0.0) {
        out.col_idx.push_back(u);
        out.edge_weight.push_back(w);
      }
    }
    if (!placed) place_self();
    out.row_ptr[v + 1] = out.col_idx.size();
  }
  return out;
}

}  // namespace

PropagationOperator build_operator(const GraphCSR& g, const GraphAggregator& kind,
                                   const OperatorOptions& options) {
  PropagationOperator op;
  op.kind = kind;
  switch (kind.kind) {
    case GraphAggregatorKind::AugNA: {
      const VectorXd d = augmented_degrees(g);
      op.row_normalized = options.aug_na_row_normalized;
      if (options.aug_na_row_normalized) {
        op.base = with_self_loops(
            g, [&](std::size_t v) { return 1.0 / d[static_cast<Eigen::Index>(v)]; },
            [&](std::size_t v, std::uint32_t, double) { return 1.0 / d[static_cast<Eigen::Index>(v)]; });
      } else {
        op.base = with_self_loops(
            g, [&](std::size_t v) { return 1.0 / d[static_cast<Eigen::Index>(v)]; },
            [&](std::size_t, std::uint32_t u, double) { return 1.0 / d[u]; });
      }
      break;
    }
    case GraphAggregatorKind::PPR: {
      if (!(kind.alpha > 0.0 && kind.alpha <= 1.0)) {
        throw ConfigError("PPR restart probability must lie in (0, 1], got " + std::to_string(kind.alpha));
      }
      const VectorXd d = augmented_degrees(g);
      op.restart_alpha = kind.alpha;
      op.base = with_self_loops(
          g, [&](std::size_t v) { return 1.0 / d[static_cast<Eigen::Index>(v)]; },
          [&](std::size_t v, std::uint32_t u, double) {
            return 1.0 / std::sqrt(d[static_cast<Eigen::Index>(v)] * d[u]);
          });
      break;
    }
    case GraphAggregatorKind::TriangleIA: {
      const GraphCSR tri = count_edge_triangles(g);
      // A^tri + I; the unit self-loop keeps every row sum >= 1.
      std::vector<double> row_sum(g.num_nodes, 1.0);
      for (std::size_t v = 0; v < g.num_nodes; ++v) {
        for (double w : tri.weights(v)) row_sum[v] += w;
      }
      op.base = with_self_loops(
          tri, [&](std::size_t v) { return 1.0 / row_sum[v]; },
          [&](std::size_t v, std::uint32_t, double w) { return w / row_sum[v]; });
      break;
    }
  }
  return op;
}

Matrix to_dense(const GraphCSR& base) {
  const auto n = static_cast<Eigen::Index>(base.num_nodes);
  Matrix dense = Matrix::Zero(n, n);
  for (std::size_t v = 0; v < base.num_nodes; ++v) {
    for (std::uint64_t e = base.row_ptr[v]; e < base.row_ptr[v + 1]; ++e) {
      dense(static_cast<Eigen::Index>(v), base.col_idx[e]) = base.weight_at(e);
    }
  }
  return dense;
}

}  // namespace sgap
