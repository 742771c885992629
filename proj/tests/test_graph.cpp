#include "simpgcn/graph.hpp"

#include "support/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace simpgcn {
namespace {

SparseGraph path3() {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  return SparseGraph::from_edges(3, e);
}

SparseGraph single_edge() {
  const std::vector<Edge> e{{0, 1}};
  return SparseGraph::from_edges(2, e);
}

Matrix dense(const SparseRowMatrix& m) { return Matrix(m); }

TEST(SparseGraph, StoresBothDirectionsSorted) {
  const std::vector<Edge> e{{2, 0}, {0, 1}};
  const SparseGraph g = SparseGraph::from_edges(3, e);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.nnz(), 4u);
  ASSERT_EQ(g.neighbor_ids(0).size(), 2u);
  EXPECT_EQ(g.neighbor_ids(0)[0], 1);
  EXPECT_EQ(g.neighbor_ids(0)[1], 2);
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(1, 2));
  EXPECT_DOUBLE_EQ(g.degree(0), 2.0);
}

TEST(SparseGraph, RejectsInvalidEdges) {
  const std::vector<Edge> dup{{0, 1}, {1, 0}};
  EXPECT_THROW(SparseGraph::from_edges(2, dup), std::invalid_argument);
  const std::vector<Edge> range{{0, 3}};
  EXPECT_THROW(SparseGraph::from_edges(3, range), std::invalid_argument);
  const std::vector<Edge> loop{{1, 1}};
  EXPECT_THROW(SparseGraph::from_edges(2, loop), std::invalid_argument);
  EXPECT_NO_THROW(SparseGraph::from_edges(2, loop, true));
  const std::vector<Edge> weight{{0, 1, -1.0}};
  EXPECT_THROW(SparseGraph::from_edges(2, weight), std::invalid_argument);
}

TEST(NormalizeWithSelfloops, IsolatedNodeIsIdentity) {
  const SparseGraph g = SparseGraph::from_edges(1, std::vector<Edge>{});
  const Matrix p = dense(normalize_with_selfloops(g));
  ASSERT_EQ(p.rows(), 1);
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
}

TEST(NormalizeWithSelfloops, SingleEdgeIsAllHalf) {
  const Matrix p = dense(normalize_with_selfloops(single_edge()));
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(p(i, j), 0.5);
  }
}

TEST(NormalizeWithSelfloops, PathGraphEntries) {
  const Matrix p = dense(normalize_with_selfloops(path3()));
  EXPECT_NEAR(p(0, 1), 0.408248290463863, 1e-15);
  EXPECT_NEAR(p(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(p(0, 2), 0.0);
}

TEST(NormalizePlain, SingleEdgeAndIsolatedRow) {
  const std::vector<Edge> e{{0, 1}};
  const Matrix p = dense(normalize_plain(SparseGraph::from_edges(3, e)));
  EXPECT_DOUBLE_EQ(p(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(p(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.0);
  EXPECT_TRUE(p.row(2).isZero(0.0));
  EXPECT_TRUE(p.allFinite());
}

TEST(NormalizePlain, TriangleOffDiagonalHalf) {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
  const Matrix p = dense(normalize_plain(SparseGraph::from_edges(3, e)));
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), i == j ? 0.0 : 0.5, 1e-15);
  }
}

TEST(Smoothness, SingleEdgeValues) {
  const SparseGraph g = single_edge();
  EXPECT_DOUBLE_EQ(smoothness(Vector::Ones(2), g), 0.0);
  EXPECT_NEAR(smoothness((Vector(2) << 1.0, -1.0).finished(), g), 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(smoothness(Vector::Zero(2), g), 0.0);
  EXPECT_THROW(smoothness(Vector::Zero(3), g), DimensionError);
}

TEST(Smoothness, EdgeSumMatchesDenseQuadraticForm) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t n = 5 + seed % 20;
    const SparseGraph g = synthetic::random_graph(n, 0.3, seed);
    const Vector f = synthetic::random_matrix(n, 1, seed + 100).col(0);
    const Matrix lap =
        Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
        dense(normalize_with_selfloops(g));
    const double quad = f.dot(lap * f);
    EXPECT_NEAR(smoothness(f, g), quad, 1e-10) << "seed " << seed;
    EXPECT_GE(smoothness(f, g), 0.0);
  }
}

TEST(SignalRecovery, QuarterStepOnEdge) {
  const GraphSignal out = signal_recovery_step((Vector(2) << 1.0, 0.0).finished(), single_edge(), 0.25);
  EXPECT_NEAR(out[0], 0.75, 1e-15);
  EXPECT_NEAR(out[1], 0.25, 1e-15);
}

TEST(SignalRecovery, ZeroWeightLeavesSignal) {
  const Vector f0 = synthetic::random_matrix(3, 1, 4).col(0);
  EXPECT_EQ(signal_recovery_step(f0, path3(), 0.0), f0);
}

TEST(SignalRecovery, HalfStepEqualsPropagation) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 1 + seed % 50;
    const SparseGraph g = synthetic::random_graph(n, 0.3, seed);
    const Vector f0 = synthetic::random_matrix(n, 1, seed + 7).col(0);
    const Vector expected = normalize_with_selfloops(g) * f0;
    const Vector got = signal_recovery_step(f0, g, 0.5);
    EXPECT_LT((got - expected).lpNorm<Eigen::Infinity>(), 1e-10) << "seed " << seed;
  }
}

TEST(SignalRecovery, RejectsBadInput) {
  EXPECT_THROW(signal_recovery_step(Vector::Zero(2), path3(), 0.5), DimensionError);
  EXPECT_THROW(signal_recovery_step(Vector::Zero(3), path3(), -1.0), std::invalid_argument);
}

TEST(NormalizeWithSelfloops, SymmetricWithSpectralRadiusAtMostOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 2 + seed % 29;
    const Matrix p = dense(normalize_with_selfloops(synthetic::random_graph(n, 0.3, seed)));
    EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
    EXPECT_LE(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-12) << "seed " << seed;
  }
}

TEST(Overlap, SelfDisjointAndCounts) {
  const SparseGraph a = path3();
  EXPECT_EQ(overlap(a, a), 1.0);
  const std::vector<Edge> other{{0, 2}};
  EXPECT_EQ(overlap(a, SparseGraph::from_edges(3, other)), 0.0);
  const std::vector<Edge> half{{0, 1}, {0, 2}};
  const SparseGraph b = SparseGraph::from_edges(3, half);
  EXPECT_EQ(overlap_count(a, b), 2u);
  EXPECT_DOUBLE_EQ(overlap(a, b) * static_cast<double>(a.nnz()), 2.0);
}

TEST(Overlap, IgnoresWeights) {
  const std::vector<Edge> heavy{{0, 1, 3.0}};
  EXPECT_EQ(overlap(single_edge(), SparseGraph::from_edges(2, heavy)), 1.0);
}

TEST(Overlap, Errors) {
  const SparseGraph empty = SparseGraph::from_edges(3, std::vector<Edge>{});
  EXPECT_THROW(overlap(empty, path3()), std::invalid_argument);
  EXPECT_THROW(overlap(path3(), single_edge()), std::invalid_argument);
}

TEST(AddGraphs, SumsSharedWeights) {
  const std::vector<Edge> e{{0, 1}, {0, 2}};
  const SparseGraph sum = add_graphs(path3(), SparseGraph::from_edges(3, e));
  EXPECT_DOUBLE_EQ(sum.weight(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(sum.weight(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(sum.weight(0, 2), 1.0);
  EXPECT_EQ(sum.num_edges(), 3u);
}

}  // namespace
}  // namespace simpgcn
