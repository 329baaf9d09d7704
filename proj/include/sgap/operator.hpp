#pragma once

#include <string>

#include "sgap/graph.hpp"

namespace sgap {

enum class GraphAggregatorKind { AugNA, PPR, TriangleIA };

/// One choice of graph_aggregator. `alpha` is the PPR restart probability and
/// is 0 for the other kinds.
struct GraphAggregator {
  GraphAggregatorKind kind = GraphAggregatorKind::AugNA;
  double alpha = 0.0;

  static GraphAggregator aug_na() { return {GraphAggregatorKind::AugNA, 0.0}; }
  static GraphAggregator ppr(double alpha) { return {GraphAggregatorKind::PPR, alpha}; }
  static GraphAggregator triangle_ia() { return {GraphAggregatorKind::TriangleIA, 0.0}; }

  bool operator==(const GraphAggregator&) const = default;
};

std::string to_string(const GraphAggregator& ga);

struct OperatorOptions {
  // Use D̃^{-1}Ã (rows sum to 1) instead of the column-normalized ÃD̃^{-1}.
  bool aug_na_row_normalized = false;
};

/// A single aggregation step. `base` holds the normalized weights including
/// the self-loop entries; PPR adds the restart term on top of it.
struct PropagationOperator {
  GraphCSR base;
  double restart_alpha = 0.0;
  GraphAggregator kind;
  bool row_normalized = false;
};

PropagationOperator build_operator(const GraphCSR& g, const GraphAggregator& kind,
                                   const OperatorOptions& options = {});

/// Dense n×n matrix of `op.base`. Tests and small-graph diagnostics only.
Matrix to_dense(const GraphCSR& base);

}  // namespace sgap
