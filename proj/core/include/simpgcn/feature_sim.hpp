#pragma once

#include "simpgcn/graph.hpp"
#include "simpgcn/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace simpgcn {

/// Dense n x d node-feature matrix with finite entries and n, d >= 1.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix values);

  std::size_t num_nodes() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t num_features() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }

  /// Copy with every nonzero row scaled to unit L1 norm.
  FeatureMatrix row_normalized() const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Matrix values_;
};

/// Dense symmetric cosine-similarity matrix.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(Matrix values);

  std::size_t num_nodes() const { return static_cast<std::size_t>(values_.rows()); }
  double operator()(NodeId i, NodeId j) const { return values_(i, j); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

/// Row-at-a-time cosine similarity, for graphs too large to hold S densely.
///
/// Rows are normalized once and stored sparsely. Entry (i, j) is the sum of
/// products over the shared nonzero features in increasing feature order, so
/// S(i, j) and S(j, i) are bitwise equal and every caller sees the same
/// values regardless of how rows are visited.
class SimilarityRows {
 public:
  explicit SimilarityRows(const FeatureMatrix& x);

  std::size_t num_nodes() const { return row_offsets_.size() - 1; }
  bool is_zero_row(NodeId i) const { return row_offsets_[i] == row_offsets_[i + 1]; }

  /// Fills `out` (length n) with S(i, .).
  void row(NodeId i, std::span<double> out) const;

 private:
  std::size_t num_features_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::int32_t> feature_ids_;
  std::vector<double> unit_values_;
};

struct NodePair {
  NodeId i = 0;
  NodeId j = 0;
  double target = 0.0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

/// Node pairs for the similarity-regression pretext task.
struct PairSet {
  std::vector<NodePair> pairs;
  std::size_t per_polarity = 0;  ///< m: most-similar and most-dissimilar picks per node.

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  friend bool operator==(const PairSet&, const PairSet&) = default;
};

/// S_ij = x_i^T x_j / (||x_i|| ||x_j||); zero when either row is all zeros.
/// S_ii = 1 for nonzero rows.
SimilarityMatrix cosine_similarity(const FeatureMatrix& x);

/// Indices j != i of the k largest entries of `row`, ordered by decreasing
/// value with ties going to the smaller index.
std::vector<NodeId> top_k_indices(std::span<const double> row, NodeId self, std::size_t k);

/// Indices j != i of the k smallest entries of `row`, ordered by increasing
/// value with ties going to the smaller index.
std::vector<NodeId> bottom_k_indices(std::span<const double> row, NodeId self, std::size_t k);

/// Directed k-nearest-neighbor lists (by cosine similarity), one per node.
std::vector<std::vector<NodeId>> knn_lists(const FeatureMatrix& x, std::size_t k);

/// kNN feature graph: each node links to its k most cosine-similar nodes, and
/// the directed lists are symmetrized by union with unit weights.
/// Throws std::invalid_argument unless 1 <= k < n.
SparseGraph build_knn_graph(const FeatureMatrix& x, std::size_t k);
SparseGraph build_knn_graph(const SimilarityMatrix& s, std::size_t k);

/// Union-symmetrized graph from directed neighbor lists.
SparseGraph symmetrize_lists(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& lists);

/// For every node i: its m most similar and m most dissimilar other nodes,
/// emitted as ordered pairs (i, j) with target S_ij. Selection is fully
/// determined by the similarity values and the smaller-index tie-break; the
/// seed is accepted for interface stability and does not change the result.
/// Throws std::invalid_argument unless 1 <= m < n.
PairSet sample_pairs(const SimilarityMatrix& s, std::size_t m, std::uint64_t seed);
PairSet sample_pairs(const FeatureMatrix& x, std::size_t m, std::uint64_t seed);

}  // namespace simpgcn
