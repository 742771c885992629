#include "simpgcn/model.hpp"

#include "support/reference_gcn.hpp"
#include "support/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace simpgcn {
namespace {

LayerParams layer(Eigen::Index d_in, Eigen::Index d_out) {
  LayerParams lp;
  lp.weight = Matrix::Zero(d_in, d_out);
  lp.score_weight = Vector::Zero(d_in);
  lp.loop_weight = Vector::Zero(d_in);
  return lp;
}

SparseGraph path3() {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  return SparseGraph::from_edges(3, e);
}

TEST(ScoreVector, Examples) {
  LayerParams lp = layer(2, 1);
  const Matrix h = synthetic::random_matrix(4, 2, 1);
  EXPECT_TRUE(score_vector(h, lp).isApprox(Vector::Constant(4, 0.5)));
  lp.score_bias = 2.0;
  const Vector s = score_vector(h, lp);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(s[i], 0.8807970779778823, 1e-15);
  lp.score_weight << 3.0, -1.0;
  EXPECT_NEAR(score_vector(Matrix::Zero(1, 2), lp)[0], 0.8807970779778823, 1e-15);
  EXPECT_THROW(score_vector(Matrix::Zero(1, 3), lp), DimensionError);
}

TEST(ScoreVector, StrictlyInsideUnitInterval) {
  LayerParams lp = layer(3, 1);
  lp.score_weight << 5.0, -5.0, 2.0;
  const Vector s = score_vector(synthetic::random_matrix(200, 3, 2), lp);
  EXPECT_GT(s.minCoeff(), 0.0);
  EXPECT_LT(s.maxCoeff(), 1.0);
}

TEST(SelfloopValues, Examples) {
  LayerParams lp = layer(1, 1);
  const Matrix h = Matrix::Constant(3, 1, 2.0);
  EXPECT_TRUE(selfloop_values(h, lp).isZero(0.0));
  lp.loop_bias = 1.0;
  EXPECT_TRUE(selfloop_values(h, lp).isApprox(Vector::Ones(3)));
  lp.loop_weight << 0.5;
  lp.loop_bias = -1.0;
  EXPECT_DOUBLE_EQ(selfloop_values(h, lp)[0], 0.0);
}

TEST(AssemblePropagator, Limits) {
  const NormalizedPropagator po = normalize_with_selfloops(path3());
  const std::vector<Edge> e{{0, 2}};
  const NormalizedPropagator pf = normalize_plain(SparseGraph::from_edges(3, e));
  const Vector k = synthetic::random_matrix(3, 1, 5).col(0);
  EXPECT_TRUE(Matrix(assemble_propagator(Vector::Ones(3), po, pf, k, 0.0)).isApprox(Matrix(po)));
  EXPECT_EQ(Matrix(assemble_propagator(Vector::Zero(3), po, pf, k, 0.0)), Matrix(pf));
}

TEST(AssemblePropagator, HandExample) {
  SparseRowMatrix po = Matrix::Constant(2, 2, 0.5).sparseView();
  Matrix anti(2, 2);
  anti << 0, 1, 1, 0;
  SparseRowMatrix pf = anti.sparseView();
  const Matrix got = Matrix(assemble_propagator(Vector::Constant(2, 0.5), po, pf, Vector::Ones(2), 0.1));
  Matrix expected(2, 2);
  expected << 0.35, 0.75, 0.75, 0.35;
  EXPECT_TRUE(got.isApprox(expected, 1e-15));
  EXPECT_THROW(assemble_propagator(Vector::Ones(3), po, pf, Vector::Ones(2), 0.1), DimensionError);
}

TEST(AssemblePropagator, LinearInLoopsAndAffineInScores) {
  const SparseGraph g = synthetic::random_graph(8, 0.4, 1);
  const NormalizedPropagator po = normalize_with_selfloops(g);
  const NormalizedPropagator pf = normalize_plain(synthetic::random_graph(8, 0.4, 2));
  const Vector s = (synthetic::random_matrix(8, 1, 3).col(0).array() * 0.5 + 0.5).matrix();
  const Vector k1 = synthetic::random_matrix(8, 1, 4).col(0);
  const Vector k2 = synthetic::random_matrix(8, 1, 5).col(0);
  auto p = [&](const Vector& sv, const Vector& kv) {
    return Matrix(assemble_propagator(sv, po, pf, kv, 0.3));
  };
  const Matrix zero_k = p(s, Vector::Zero(8));
  EXPECT_TRUE((p(s, k1 + 2.0 * k2) - zero_k).isApprox((p(s, k1) - zero_k) + 2.0 * (p(s, k2) - zero_k), 1e-12));
  const Vector s2 = Vector::Constant(8, 0.25);
  const Matrix mid = p(0.5 * (s + s2), k1);
  EXPECT_TRUE(mid.isApprox(0.5 * (p(s, k1) + p(s2, k1)), 1e-12));
}

/// Fixed small weights on a 3-node path; expected values come from a dense
/// evaluation of diag(s) Po + diag(1-s) Pf + gamma diag(K) applied to H W.
struct ThreeNodeCase {
  GraphOperators ops;
  Matrix x;
  ModelParams params;
  ThreeNodeCase() {
    const std::vector<Edge> feat{{0, 2}};
    ops = GraphOperators::build(path3(), SparseGraph::from_edges(3, feat));
    x.resize(3, 2);
    x << 1, 0, 0, 1, 1, 1;
    params.gamma = 0.5;
    LayerParams& l1 = params.layers[0];
    l1.weight.resize(2, 2);
    l1.weight << 1, 2, 2, -3;
    l1.score_weight = (Vector(2) << 1, -1).finished();
    l1.score_bias = 0.0;
    l1.loop_weight = (Vector(2) << 0, 1).finished();
    l1.loop_bias = 1.0;
    LayerParams& l2 = params.layers[1];
    l2.weight.resize(2, 2);
    l2.weight << 1, 0, -1, 1;
    l2.score_weight = (Vector(2) << 0, 1).finished();
    l2.score_bias = -1.0;
    l2.loop_weight = (Vector(2) << 1, 0).finished();
    l2.loop_bias = 0.0;
    params.ssl_head.weight = Vector::Zero(2);
  }
};

TEST(Forward, ThreeNodeDenseOracle) {
  const ThreeNodeCase c;
  const ForwardTrace t = forward(c.x, c.ops, c.params, Propagation::adaptive);
  Matrix pre1(3, 2);
  pre1 << 2.26926038333427, 0.5667569123960867, 2.618473782950218, -3.1591465458607733,
      4.658248290463863, -0.8623724356957947;
  Matrix logits(3, 2);
  logits << 5.512958281538016, 0.7545270372781975, 4.361319110789247, 0.06222700464051935,
      13.008161296570501, 0.4143325028050134;
  EXPECT_LT((t.layers[0].pre_activation - pre1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t.logits - logits).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(t.hidden.isApprox(pre1.cwiseMax(0.0)));
}

TEST(Forward, ZeroFirstLayerGivesConstantSecondScore) {
  ThreeNodeCase c;
  c.params.layers[0].weight.setZero();
  const ForwardTrace t = forward(c.x, c.ops, c.params, Propagation::adaptive);
  EXPECT_TRUE(t.hidden.isZero(0.0));
  const double expected = 1.0 / (1.0 + std::exp(1.0));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(t.layers[1].score[i], expected, 1e-15);
}

TEST(Forward, DeterministicAndShapeChecked) {
  const ThreeNodeCase c;
  const ForwardTrace a = forward(c.x, c.ops, c.params, Propagation::adaptive);
  const ForwardTrace b = forward(c.x, c.ops, c.params, Propagation::adaptive);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_THROW(forward(Matrix::Zero(3, 3), c.ops, c.params, Propagation::adaptive), DimensionError);
  EXPECT_THROW(forward(Matrix::Zero(4, 2), c.ops, c.params, Propagation::adaptive), DimensionError);
}

TEST(Forward, ReducesToPlainGcn) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 6 + seed % 10;
    const SparseGraph g = synthetic::random_graph(n, 0.3, seed);
    const Matrix x = synthetic::random_matrix(n, 5, seed + 1);
    ModelParams p = init_params(5, 4, 3, 0.0, 0.0, 0.0, seed);
    // s == 1 everywhere through a saturated score and gamma = 0.
    const GraphOperators ops = GraphOperators::build(g, synthetic::random_graph(n, 0.3, seed + 2));
    const ForwardTrace fixed = forward(x, ops, p, Propagation::fixed);
    const Matrix a_hat = reference::normalized_adjacency(g.to_dense());
    const std::vector<int> labels(n, 0);
    const std::vector<int> train{0};
    const auto ref = reference::gcn_forward(a_hat, x, p.layers[0].weight, p.layers[1].weight,
                                            labels, train, 0.0);
    EXPECT_LT((fixed.logits - ref.logits).cwiseAbs().maxCoeff(), 1e-10) << "seed " << seed;

    // The adaptive path with a saturated score (sigmoid(800) == 1.0) agrees too.
    for (LayerParams& lp : p.layers) {
      lp.score_weight.setZero();
      lp.score_bias = 800.0;
    }
    const ForwardTrace adaptive = forward(x, ops, p, Propagation::adaptive);
    EXPECT_LT((adaptive.logits - ref.logits).cwiseAbs().maxCoeff(), 1e-10) << "seed " << seed;
  }
}

TEST(Forward, DropoutMasksScaleInputs) {
  const ThreeNodeCase c;
  std::mt19937_64 rng(3);
  const SparseRowMatrix xs = c.x.sparseView();
  const DropoutMasks ones{Vector::Ones(xs.nonZeros()), Matrix::Ones(3, 2)};
  const ForwardTrace plain = forward(c.x, c.ops, c.params, Propagation::adaptive);
  const ForwardTrace masked = forward(c.x, c.ops, c.params, Propagation::adaptive, &ones);
  EXPECT_EQ(plain.logits, masked.logits);
  const DropoutMasks m = sample_dropout(xs.nonZeros(), 3, 2, 0.5, rng);
  for (Eigen::Index k = 0; k < m.input.size(); ++k) {
    EXPECT_TRUE(m.input[k] == 0.0 || m.input[k] == 2.0);
  }
  const DropoutMasks bad{Vector::Ones(1), Matrix::Ones(3, 2)};
  EXPECT_THROW(forward(c.x, c.ops, c.params, Propagation::adaptive, &bad), DimensionError);
  EXPECT_THROW(sample_dropout(4, 3, 2, 1.0, rng), std::invalid_argument);
}

TEST(ClassificationLoss, Examples) {
  Matrix logits(2, 2);
  logits << 1, 0, 0, 1;
  const std::vector<Label> y{0, 1};
  const std::vector<NodeId> nodes{0, 1};
  EXPECT_NEAR(classification_loss(logits, y, nodes), 0.3132616875182228, 1e-15);
  EXPECT_NEAR(classification_loss(Matrix::Zero(2, 4), std::vector<Label>{0, 3}, nodes),
              std::log(4.0), 1e-15);
  Matrix confident(1, 2);
  confident << 800, -800;
  EXPECT_LT(classification_loss(confident, std::vector<Label>{0}, std::vector<NodeId>{0}), 1e-300);
  EXPECT_THROW(classification_loss(logits, y, std::vector<NodeId>{}), std::invalid_argument);
  EXPECT_THROW(classification_loss(logits, std::vector<Label>{0, 2}, nodes), std::invalid_argument);
}

TEST(SslLoss, Examples) {
  const Matrix h = synthetic::random_matrix(3, 2, 0);
  PairSet pairs;
  pairs.pairs = {{0, 1, 0.0}, {1, 2, 0.0}, {2, 0, 0.0}, {0, 2, 0.0}};
  SslHead head{Vector::Zero(2), 0.0};
  EXPECT_EQ(ssl_loss(h, pairs, head), 0.0);
  head.bias = 1.0;
  EXPECT_DOUBLE_EQ(ssl_loss(h, pairs, head), 1.0);

  Matrix h2(2, 2);
  h2 << 1, 2, 0, 0;
  PairSet one;
  one.pairs = {{0, 1, 0.5}};
  EXPECT_DOUBLE_EQ(ssl_loss(h2, one, SslHead{(Vector(2) << 0.5, 0.25).finished(), 0.0}), 0.25);
  EXPECT_THROW(ssl_loss(h2, PairSet{}, head), std::invalid_argument);
}

TEST(TotalLoss, LinearCombination) {
  EXPECT_EQ(total_loss(0.7, 3.0, 0.0), 0.7);
  EXPECT_DOUBLE_EQ(total_loss(0.5, 0.1, 10.0), 1.5);
  EXPECT_DOUBLE_EQ(total_loss(0.5, 0.1, 100.0), 0.5 + 100.0 * 0.1);
  EXPECT_THROW(total_loss(0.5, 0.1, -1.0), std::invalid_argument);
}

TEST(Accuracy, LowestIndexWinsTies) {
  Matrix logits(2, 2);
  logits << 1, 1, 0, 2;
  EXPECT_DOUBLE_EQ(accuracy(logits, std::vector<Label>{0, 1}, std::vector<NodeId>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(logits, std::vector<Label>{1, 1}, std::vector<NodeId>{0, 1}), 0.5);
}

TEST(InitParams, ShapesAndDeterminism) {
  const ModelParams a = init_params(5, 4, 3, 0.1, 1.0, 2.0, 9);
  const ModelParams b = init_params(5, 4, 3, 0.1, 1.0, 2.0, 9);
  EXPECT_EQ(a.layers[0].weight, b.layers[0].weight);
  EXPECT_EQ(a.input_dim(), 5u);
  EXPECT_EQ(a.hidden_dim(), 4u);
  EXPECT_EQ(a.num_classes(), 3u);
  EXPECT_EQ(a.layers[1].score_bias, 2.0);
  EXPECT_EQ(a.layers[0].loop_bias, 0.0);
  const double limit = std::sqrt(6.0 / 9.0);
  EXPECT_LE(a.layers[0].weight.cwiseAbs().maxCoeff(), limit);
  ModelParams bad = a;
  bad.layers[1].weight.resize(3, 3);
  EXPECT_THROW(bad.validate(), DimensionError);
}

}  // namespace
}  // namespace simpgcn
