#pragma once

#include "simpgcn/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace simpgcn {

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;
};

/// Undirected graph stored as a symmetric adjacency in CSR form.
///
/// Every undirected edge {u, v} with u != v occupies two slots, (u, v) and
/// (v, u). A self-loop occupies one slot. Column indices are sorted within
/// each row, so traversal order is deterministic.
class SparseGraph {
 public:
  struct Neighbor {
    NodeId node;
    double weight;
  };

  SparseGraph() = default;

  /// Builds a graph from undirected edges. Each unordered pair may appear
  /// once, in either orientation. Throws std::invalid_argument on
  /// out-of-range ids, duplicates, non-positive or non-finite weights, and on
  /// self-loops unless `allow_self_loops` is set.
  static SparseGraph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                                bool allow_self_loops = false);

  std::size_t num_nodes() const { return row_offsets_.empty() ? 0 : row_offsets_.size() - 1; }
  /// Undirected edge count (self-loops counted once).
  std::size_t num_edges() const { return num_edges_; }
  /// Structural nonzeros of the adjacency matrix.
  std::size_t nnz() const { return columns_.size(); }

  std::span<const NodeId> neighbor_ids(NodeId i) const;
  std::span<const double> neighbor_weights(NodeId i) const;
  /// Weighted degree, sum_j A_ij.
  double degree(NodeId i) const;
  bool has_edge(NodeId i, NodeId j) const;
  double weight(NodeId i, NodeId j) const;

  /// Undirected edge list with u <= v, sorted lexicographically.
  std::vector<Edge> edges() const;

  Matrix to_dense() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> columns_;
  std::vector<double> weights_;
  std::size_t num_edges_ = 0;
};

/// Symmetrically normalized sparse operator acting on graph signals.
using NormalizedPropagator = SparseRowMatrix;
/// Real-valued signal with one entry per node.
using GraphSignal = Vector;

/// D~^{-1/2} (A + I) D~^{-1/2} with D~_ii = 1 + sum_j A_ij.
NormalizedPropagator normalize_with_selfloops(const SparseGraph& g);

/// D^{-1/2} A D^{-1/2}. Rows of zero-degree nodes are empty.
NormalizedPropagator normalize_plain(const SparseGraph& g);

/// f^T L f with L = I - D~^{-1/2} A~ D~^{-1/2}, evaluated as the edge sum
/// 1/2 sum_ij A~_ij (f_i / sqrt(1 + d_i) - f_j / sqrt(1 + d_j))^2.
double smoothness(const GraphSignal& f, const SparseGraph& g);

/// One gradient step with unit learning rate on
/// ||f - f0||^2 + c f^T L f, starting from f0: returns (I - 2cL) f0.
GraphSignal signal_recovery_step(const GraphSignal& f0, const SparseGraph& g, double c);

/// Fraction of structural nonzeros of `a1` that are also nonzero in `a2`.
/// Weights are ignored. Throws std::invalid_argument when `a1` has no edges
/// or node counts differ.
double overlap(const SparseGraph& a1, const SparseGraph& a2);

/// Number of structural nonzeros shared by both adjacency matrices.
std::size_t overlap_count(const SparseGraph& a1, const SparseGraph& a2);

/// Sum of two graphs: A1 + A2, with weights added on shared edges.
SparseGraph add_graphs(const SparseGraph& a1, const SparseGraph& a2);

}  // namespace simpgcn
