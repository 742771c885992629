#pragma once

#include "simpgcn/feature_sim.hpp"
#include "simpgcn/graph.hpp"
#include "simpgcn/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace simpgcn {

using Label = std::int32_t;

/// Trainable tensors of one propagation layer.
struct LayerParams {
  Matrix weight;          ///< d_in x d_out feature transform
  Vector score_weight;    ///< d_in, drives the structure/feature balance
  double score_bias = 0.0;
  Vector loop_weight;     ///< d_in, drives the learned self-loop strength
  double loop_bias = 0.0;

  std::size_t input_dim() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weight.cols()); }
};

/// Affine map from a hidden-representation difference to a similarity score.
struct SslHead {
  Vector weight;
  double bias = 0.0;
};

struct ModelParams {
  std::array<LayerParams, 2> layers;
  SslHead ssl_head;
  double gamma = 0.0;   ///< self-loop scale
  double lambda = 0.0;  ///< weight of the similarity-regression loss

  std::size_t input_dim() const { return layers[0].input_dim(); }
  std::size_t hidden_dim() const { return layers[0].output_dim(); }
  std::size_t num_classes() const { return layers[1].output_dim(); }

  /// Throws DimensionError when layer widths do not chain or vectors have the
  /// wrong length, std::invalid_argument on non-finite values or negative
  /// gamma/lambda.
  void validate() const;
};

/// How the two layers propagate.
///  - adaptive: per-node mix of the structure and feature operators plus
///    learned self-loops.
///  - fixed: the structure operator alone (score pinned to 1, gamma ignored),
///    i.e. a plain two-layer GCN. Score and loop parameters receive zero
///    gradient.
enum class Propagation { adaptive, fixed };

/// Normalized operators for both graphs. `feature` may be empty in fixed mode.
struct GraphOperators {
  NormalizedPropagator structure;  ///< D~^{-1/2}(A+I)D~^{-1/2}
  NormalizedPropagator feature;    ///< D_f^{-1/2} A_f D_f^{-1/2}

  static GraphOperators build(const SparseGraph& graph, const SparseGraph& feature_graph);
  static GraphOperators structure_only(const SparseGraph& graph);
  std::size_t num_nodes() const { return static_cast<std::size_t>(structure.rows()); }
};

/// Inverted-dropout multipliers (0 or 1/(1-p)) for the two layer inputs.
/// `input` is aligned with the stored nonzeros of the sparse feature matrix.
struct DropoutMasks {
  Vector input;
  Matrix hidden;
};

struct LayerTrace {
  Vector score;          ///< s, strictly inside (0, 1) in adaptive mode
  Vector loops;          ///< K (before gamma scaling)
  Matrix transformed;    ///< H W
  Matrix structure_part; ///< P_structure H W
  Matrix feature_part;   ///< P_feature H W (empty in fixed mode)
  Matrix pre_activation;
};

struct ForwardTrace {
  Propagation propagation = Propagation::adaptive;
  SparseRowMatrix input;     ///< layer-1 input after dropout
  std::array<LayerTrace, 2> layers;
  Matrix hidden;             ///< layer-1 output after ReLU, before dropout
  Matrix hidden_input;       ///< layer-2 input after dropout
  Matrix logits;
};

Vector sigmoid(const Vector& z);

/// Glorot-uniform layer and head weights, zero loop biases, score biases set
/// to `score_bias_init`, and a zero head bias. Deterministic in `seed`.
ModelParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes,
                        double gamma, double lambda, double score_bias_init, std::uint64_t seed);

/// s = sigmoid(H W_s + b_s).
Vector score_vector(const Matrix& h_prev, const LayerParams& lp);
Vector score_vector(const SparseRowMatrix& h_prev, const LayerParams& lp);

/// K = H W_K + b_K, no activation.
Vector selfloop_values(const Matrix& h_prev, const LayerParams& lp);
Vector selfloop_values(const SparseRowMatrix& h_prev, const LayerParams& lp);

/// Materializes diag(s) P_orig + diag(1 - s) P_feat + gamma diag(K).
SparseRowMatrix assemble_propagator(const Vector& s, const NormalizedPropagator& p_orig,
                                    const NormalizedPropagator& p_feat, const Vector& loops,
                                    double gamma);

/// Two-layer forward pass: ReLU after layer 1, raw logits after layer 2.
/// Pass `masks` only in training mode.
ForwardTrace forward(const SparseRowMatrix& x, const GraphOperators& ops,
                     const ModelParams& params, Propagation propagation,
                     const DropoutMasks* masks = nullptr);
ForwardTrace forward(const Matrix& x, const GraphOperators& ops, const ModelParams& params,
                     Propagation propagation, const DropoutMasks* masks = nullptr);

/// Mean softmax cross-entropy over `nodes`.
double classification_loss(const Matrix& logits, std::span<const Label> labels,
                           std::span<const NodeId> nodes);

/// Mean squared error of f_w(H_i - H_j) against S_ij over all pairs.
double ssl_loss(const Matrix& hidden, const PairSet& pairs, const SslHead& head);

double total_loss(double classification, double ssl, double lambda);

/// Fraction of `nodes` whose argmax logit (lowest index on ties) equals the label.
double accuracy(const Matrix& logits, std::span<const Label> labels,
                std::span<const NodeId> nodes);

/// Samples inverted-dropout masks with a Bernoulli keep probability 1 - rate.
template <typename Rng>
DropoutMasks sample_dropout(Eigen::Index input_nnz, Eigen::Index num_nodes,
                            Eigen::Index hidden_dim, double rate, Rng& rng);

}  // namespace simpgcn

#include "simpgcn/detail/dropout.hpp"
