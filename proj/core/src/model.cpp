#include "simpgcn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace simpgcn {

namespace {

std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

template <typename In>
void check_layer_input(const In& h, const LayerParams& lp, const char* where) {
  if (h.cols() != lp.weight.rows() || lp.score_weight.size() != h.cols() ||
      lp.loop_weight.size() != h.cols()) {
    throw DimensionError(std::string(where) + ": input " + shape(h.rows(), h.cols()) +
                         " does not match layer input width " +
                         std::to_string(lp.weight.rows()));
  }
}

template <typename In>
Vector score_impl(const In& h, const LayerParams& lp) {
  check_layer_input(h, lp, "score_vector");
  Vector z = h * lp.score_weight;
  z.array() += lp.score_bias;
  return sigmoid(z);
}

template <typename In>
Vector loops_impl(const In& h, const LayerParams& lp) {
  check_layer_input(h, lp, "selfloop_values");
  Vector k = h * lp.loop_weight;
  k.array() += lp.loop_bias;
  return k;
}

template <typename In>
LayerTrace layer_forward(const In& h, const LayerParams& lp, const GraphOperators& ops,
                         double gamma, Propagation propagation) {
  check_layer_input(h, lp, "forward");
  LayerTrace t;
  t.transformed = h * lp.weight;
  t.structure_part = ops.structure * t.transformed;
  if (propagation == Propagation::fixed) {
    t.score = Vector::Ones(h.rows());
    t.loops = Vector::Zero(h.rows());
    t.pre_activation = t.structure_part;
    return t;
  }
  t.score = score_impl(h, lp);
  t.loops = loops_impl(h, lp);
  t.feature_part = ops.feature * t.transformed;
  const Vector complement = (1.0 - t.score.array()).matrix();
  t.pre_activation = t.score.asDiagonal() * t.structure_part;
  t.pre_activation.noalias() += complement.asDiagonal() * t.feature_part;
  const Vector loop_scale = gamma * t.loops;
  t.pre_activation.noalias() += loop_scale.asDiagonal() * t.transformed;
  return t;
}

void check_operators(const GraphOperators& ops, Eigen::Index n, Propagation propagation) {
  if (ops.structure.rows() != n || ops.structure.cols() != n) {
    throw DimensionError("structure operator is " + shape(ops.structure.rows(), ops.structure.cols()) +
                         " but there are " + std::to_string(n) + " nodes");
  }
  if (propagation == Propagation::adaptive &&
      (ops.feature.rows() != n || ops.feature.cols() != n)) {
    throw DimensionError("feature operator is " + shape(ops.feature.rows(), ops.feature.cols()) +
                         " but there are " + std::to_string(n) + " nodes");
  }
}

void check_nodes(std::span<const NodeId> nodes, Eigen::Index n) {
  for (NodeId v : nodes) {
    if (v < 0 || v >= n) throw std::invalid_argument("node id " + std::to_string(v) + " out of range");
  }
}

}  // namespace

void ModelParams::validate() const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerParams& lp = layers[l];
    const std::string name = "layer " + std::to_string(l + 1);
    if (lp.score_weight.size() != lp.weight.rows() || lp.loop_weight.size() != lp.weight.rows()) {
      throw DimensionError(name + ": score/loop weights must have one entry per input feature");
    }
    check_finite(lp.weight, name.c_str());
    check_finite(lp.score_weight, name.c_str());
    check_finite(lp.loop_weight, name.c_str());
    if (!std::isfinite(lp.score_bias) || !std::isfinite(lp.loop_bias)) {
      throw std::invalid_argument(name + ": non-finite bias");
    }
  }
  if (layers[1].weight.rows() != layers[0].weight.cols()) {
    throw DimensionError("layer widths do not chain: " +
                         shape(layers[0].weight.rows(), layers[0].weight.cols()) + " then " +
                         shape(layers[1].weight.rows(), layers[1].weight.cols()));
  }
  if (ssl_head.weight.size() != layers[0].weight.cols()) {
    throw DimensionError("ssl head width " + std::to_string(ssl_head.weight.size()) +
                         " does not match hidden width " + std::to_string(layers[0].weight.cols()));
  }
  check_finite(ssl_head.weight, "ssl head");
  if (!std::isfinite(ssl_head.bias)) throw std::invalid_argument("ssl head: non-finite bias");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
}

GraphOperators GraphOperators::build(const SparseGraph& graph, const SparseGraph& feature_graph) {
  if (graph.num_nodes() != feature_graph.num_nodes()) {
    throw DimensionError("graph and feature graph have different node counts");
  }
  return {normalize_with_selfloops(graph), normalize_plain(feature_graph)};
}

GraphOperators GraphOperators::structure_only(const SparseGraph& graph) {
  return {normalize_with_selfloops(graph), NormalizedPropagator()};
}

ModelParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes,
                        double gamma, double lambda, double score_bias_init, std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0 || num_classes == 0) {
    throw std::invalid_argument("init_params: all widths must be positive");
  }
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = limit * (2.0 * detail::unit_uniform(rng) - 1.0);
      }
    }
    return w;
  };
  ModelParams p;
  const std::array<std::size_t, 3> widths{input_dim, hidden_dim, num_classes};
  for (std::size_t l = 0; l < 2; ++l) {
    LayerParams& lp = p.layers[l];
    lp.weight = glorot(widths[l], widths[l + 1]);
    lp.score_weight = glorot(widths[l], 1).col(0);
    lp.score_bias = score_bias_init;
    lp.loop_weight = glorot(widths[l], 1).col(0);
    lp.loop_bias = 0.0;
  }
  p.ssl_head.weight = glorot(hidden_dim, 1).col(0);
  p.ssl_head.bias = 0.0;
  p.gamma = gamma;
  p.lambda = lambda;
  p.validate();
  return p;
}

Vector sigmoid(const Vector& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double v = z[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return out;
}

Vector score_vector(const Matrix& h_prev, const LayerParams& lp) { return score_impl(h_prev, lp); }
Vector score_vector(const SparseRowMatrix& h_prev, const LayerParams& lp) {
  return score_impl(h_prev, lp);
}

Vector selfloop_values(const Matrix& h_prev, const LayerParams& lp) { return loops_impl(h_prev, lp); }
Vector selfloop_values(const SparseRowMatrix& h_prev, const LayerParams& lp) {
  return loops_impl(h_prev, lp);
}

SparseRowMatrix assemble_propagator(const Vector& s, const NormalizedPropagator& p_orig,
                                    const NormalizedPropagator& p_feat, const Vector& loops,
                                    double gamma) {
  const Eigen::Index n = s.size();
  if (p_orig.rows() != n || p_orig.cols() != n || p_feat.rows() != n || p_feat.cols() != n ||
      loops.size() != n) {
    throw DimensionError("assemble_propagator: all operands must describe " + std::to_string(n) +
                         " nodes");
  }
  const Vector complement = (1.0 - s.array()).matrix();
  SparseRowMatrix loops_diag(n, n);
  loops_diag.reserve(Eigen::VectorXi::Ones(n));
  for (Eigen::Index i = 0; i < n; ++i) loops_diag.insert(i, i) = gamma * loops[i];
  SparseRowMatrix combined = s.asDiagonal() * p_orig;
  combined = combined + SparseRowMatrix(complement.asDiagonal() * p_feat);
  combined = combined + loops_diag;
  combined.makeCompressed();
  return combined;
}

ForwardTrace forward(const SparseRowMatrix& x, const GraphOperators& ops,
                     const ModelParams& params, Propagation propagation,
                     const DropoutMasks* masks) {
  params.validate();
  check_operators(ops, x.rows(), propagation);
  ForwardTrace trace;
  trace.propagation = propagation;
  trace.input = x;
  trace.input.makeCompressed();
  if (masks != nullptr) {
    if (masks->input.size() != trace.input.nonZeros()) {
      throw DimensionError("input dropout mask does not match the feature nonzeros");
    }
    Eigen::Map<Vector>(trace.input.valuePtr(), trace.input.nonZeros()).array() *=
        masks->input.array();
  }
  trace.layers[0] = layer_forward(trace.input, params.layers[0], ops, params.gamma, propagation);
  trace.hidden = trace.layers[0].pre_activation.cwiseMax(0.0);
  if (masks != nullptr) {
    if (masks->hidden.rows() != trace.hidden.rows() || masks->hidden.cols() != trace.hidden.cols()) {
      throw DimensionError("hidden dropout mask has shape " +
                           shape(masks->hidden.rows(), masks->hidden.cols()));
    }
    trace.hidden_input = trace.hidden.cwiseProduct(masks->hidden);
  } else {
    trace.hidden_input = trace.hidden;
  }
  trace.layers[1] =
      layer_forward(trace.hidden_input, params.layers[1], ops, params.gamma, propagation);
  trace.logits = trace.layers[1].pre_activation;
  return trace;
}

ForwardTrace forward(const Matrix& x, const GraphOperators& ops, const ModelParams& params,
                     Propagation propagation, const DropoutMasks* masks) {
  const SparseRowMatrix sparse = x.sparseView();
  return forward(sparse, ops, params, propagation, masks);
}

double classification_loss(const Matrix& logits, std::span<const Label> labels,
                           std::span<const NodeId> nodes) {
  if (nodes.empty()) throw std::invalid_argument("classification_loss: empty node set");
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw DimensionError("classification_loss: one label per node required");
  }
  check_nodes(nodes, logits.rows());
  double total = 0.0;
  for (NodeId v : nodes) {
    const Label y = labels[static_cast<std::size_t>(v)];
    if (y < 0 || y >= logits.cols()) {
      throw std::invalid_argument("label " + std::to_string(y) + " of node " + std::to_string(v) +
                                  " out of range");
    }
    const auto row = logits.row(v);
    const double peak = row.maxCoeff();
    const double log_sum = peak + std::log((row.array() - peak).exp().sum());
    total += log_sum - row[y];
  }
  return total / static_cast<double>(nodes.size());
}

double ssl_loss(const Matrix& hidden, const PairSet& pairs, const SslHead& head) {
  if (pairs.empty()) throw std::invalid_argument("ssl_loss: empty pair set");
  if (head.weight.size() != hidden.cols()) {
    throw DimensionError("ssl_loss: head width does not match hidden width");
  }
  double total = 0.0;
  for (const NodePair& p : pairs.pairs) {
    if (p.i < 0 || p.j < 0 || p.i >= hidden.rows() || p.j >= hidden.rows()) {
      throw std::invalid_argument("ssl_loss: pair index out of range");
    }
    const double prediction = (hidden.row(p.i) - hidden.row(p.j)).dot(head.weight) + head.bias;
    const double r = prediction - p.target;
    total += r * r;
  }
  return total / static_cast<double>(pairs.size());
}

double total_loss(double classification, double ssl, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("total_loss: lambda must be >= 0");
  return classification + lambda * ssl;
}

double accuracy(const Matrix& logits, std::span<const Label> labels,
                std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  check_nodes(nodes, logits.rows());
  std::size_t correct = 0;
  for (NodeId v : nodes) {
    Eigen::Index best = 0;
    logits.row(v).maxCoeff(&best);
    if (best == labels[static_cast<std::size_t>(v)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

}  // namespace simpgcn
