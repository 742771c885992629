#include "simpgcn/feature_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace simpgcn {

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("feature matrix must have at least one row and one column");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("feature matrix contains non-finite entries");
  }
}

FeatureMatrix FeatureMatrix::row_normalized() const {
  Matrix out = values_;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double l1 = out.row(i).cwiseAbs().sum();
    if (l1 > 0.0) out.row(i) /= l1;
  }
  return FeatureMatrix(std::move(out));
}

SimilarityMatrix::SimilarityMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) {
    throw DimensionError("similarity matrix must be square");
  }
}

SimilarityRows::SimilarityRows(const FeatureMatrix& x)
    : num_features_(x.num_features()) {
  const Matrix& v = x.values();
  row_offsets_.reserve(x.num_nodes() + 1);
  row_offsets_.push_back(0);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double norm = v.row(i).norm();
    if (norm > 0.0) {
      for (Eigen::Index k = 0; k < v.cols(); ++k) {
        if (v(i, k) != 0.0) {
          feature_ids_.push_back(static_cast<std::int32_t>(k));
          unit_values_.push_back(v(i, k) / norm);
        }
      }
    }
    row_offsets_.push_back(feature_ids_.size());
  }
}

void SimilarityRows::row(NodeId i, std::span<double> out) const {
  const std::size_t n = num_nodes();
  if (out.size() != n) throw DimensionError("SimilarityRows::row: output length mismatch");
  const auto r = static_cast<std::size_t>(i);
  if (is_zero_row(i)) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::vector<double> dense_row(num_features_, 0.0);
  for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
    dense_row[static_cast<std::size_t>(feature_ids_[p])] = unit_values_[p];
  }
  for (std::size_t j = 0; j < n; ++j) {
    // Features absent from row i add +0.0, which leaves the partial sum
    // unchanged, so this equals the ordered sum over shared features.
    double acc = 0.0;
    for (std::size_t p = row_offsets_[j]; p < row_offsets_[j + 1]; ++p) {
      acc += unit_values_[p] * dense_row[static_cast<std::size_t>(feature_ids_[p])];
    }
    out[j] = std::clamp(acc, -1.0, 1.0);
  }
  out[r] = 1.0;
}

SimilarityMatrix cosine_similarity(const FeatureMatrix& x) {
  const SimilarityRows rows(x);
  const auto n = static_cast<Eigen::Index>(x.num_nodes());
  Matrix s(n, n);
  std::vector<double> buffer(x.num_nodes());
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.row(static_cast<NodeId>(i), buffer);
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = buffer[static_cast<std::size_t>(j)];
  }
  return SimilarityMatrix(std::move(s));
}

namespace {

template <typename Before>
std::vector<NodeId> select_k(std::span<const double> row, NodeId self, std::size_t k,
                             Before before) {
  std::vector<NodeId> candidates;
  candidates.reserve(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (static_cast<NodeId>(j) != self) candidates.push_back(static_cast<NodeId>(j));
  }
  if (k > candidates.size()) {
    throw std::invalid_argument("requested " + std::to_string(k) + " neighbors but only " +
                                std::to_string(candidates.size()) + " candidates exist");
  }
  auto cmp = [&](NodeId a, NodeId b) { return before(row[a], row[b]) || (row[a] == row[b] && a < b); };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), cmp);
  candidates.resize(k);
  return candidates;
}

void check_count(const char* what, std::size_t k, std::size_t n) {
  if (k < 1 || k >= n) {
    throw std::invalid_argument(std::string(what) + " must satisfy 1 <= value < n (got " +
                                std::to_string(k) + ", n = " + std::to_string(n) + ")");
  }
}

}  // namespace

std::vector<NodeId> top_k_indices(std::span<const double> row, NodeId self, std::size_t k) {
  return select_k(row, self, k, [](double a, double b) { return a > b; });
}

std::vector<NodeId> bottom_k_indices(std::span<const double> row, NodeId self, std::size_t k) {
  return select_k(row, self, k, [](double a, double b) { return a < b; });
}

SparseGraph symmetrize_lists(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& lists) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (NodeId j : lists[i]) {
      const auto a = static_cast<NodeId>(i);
      edges.push_back({std::min(a, j), std::max(a, j), 1.0});
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
              edges.end());
  return SparseGraph::from_edges(num_nodes, edges);
}

std::vector<std::vector<NodeId>> knn_lists(const FeatureMatrix& x, std::size_t k) {
  const std::size_t n = x.num_nodes();
  check_count("k", k, n);
  const SimilarityRows rows(x);
  std::vector<std::vector<NodeId>> lists(n);
  std::vector<double> buffer(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows.row(static_cast<NodeId>(i), buffer);
    lists[i] = top_k_indices(buffer, static_cast<NodeId>(i), k);
  }
  return lists;
}

SparseGraph build_knn_graph(const FeatureMatrix& x, std::size_t k) {
  return symmetrize_lists(x.num_nodes(), knn_lists(x, k));
}

SparseGraph build_knn_graph(const SimilarityMatrix& s, std::size_t k) {
  const std::size_t n = s.num_nodes();
  check_count("k", k, n);
  std::vector<std::vector<NodeId>> lists(n);
  std::vector<double> buffer(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) buffer[j] = s.values()(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(j));
    lists[i] = top_k_indices(buffer, static_cast<NodeId>(i), k);
  }
  return symmetrize_lists(n, lists);
}

namespace {

template <typename RowSource>
PairSet sample_from_rows(std::size_t n, std::size_t m, RowSource&& fill_row) {
  check_count("m", m, n);
  PairSet set;
  set.per_polarity = m;
  set.pairs.reserve(2 * m * n);
  std::vector<double> buffer(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto node = static_cast<NodeId>(i);
    fill_row(node, buffer);
    for (NodeId j : top_k_indices(buffer, node, m)) set.pairs.push_back({node, j, buffer[j]});
    for (NodeId j : bottom_k_indices(buffer, node, m)) set.pairs.push_back({node, j, buffer[j]});
  }
  return set;
}

}  // namespace

PairSet sample_pairs(const SimilarityMatrix& s, std::size_t m, std::uint64_t /*seed*/) {
  const std::size_t n = s.num_nodes();
  return sample_from_rows(n, m, [&](NodeId i, std::span<double> out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = s.values()(i, static_cast<Eigen::Index>(j));
  });
}

PairSet sample_pairs(const FeatureMatrix& x, std::size_t m, std::uint64_t /*seed*/) {
  const SimilarityRows rows(x);
  return sample_from_rows(x.num_nodes(), m,
                          [&](NodeId i, std::span<double> out) { rows.row(i, out); });
}

}  // namespace simpgcn
