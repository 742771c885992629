#include "simpgcn/diff_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace simpgcn {

namespace {

LayerParams zero_layer(const LayerParams& like) {
  LayerParams z;
  z.weight = Matrix::Zero(like.weight.rows(), like.weight.cols());
  z.score_weight = Vector::Zero(like.score_weight.size());
  z.loop_weight = Vector::Zero(like.loop_weight.size());
  return z;
}

/// d(mean cross-entropy)/d(logits); rows outside `nodes` stay zero.
Matrix classification_grad(const Matrix& logits, std::span<const Label> labels,
                           std::span<const NodeId> nodes) {
  Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
  const double scale = 1.0 / static_cast<double>(nodes.size());
  for (NodeId v : nodes) {
    const auto row = logits.row(v);
    const double peak = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - peak).exp().matrix();
    grad.row(v) += scale * e / e.sum();
    grad(v, labels[static_cast<std::size_t>(v)]) -= scale;
  }
  return grad;
}

/// Backpropagates one layer. Fills `grad` and returns d(loss)/d(input) when
/// `want_input_grad` is set (otherwise an empty matrix).
template <typename In>
Matrix layer_backward(const In& input, const LayerParams& lp, const LayerTrace& t,
                      const GraphOperators& ops, double gamma, Propagation propagation,
                      const Matrix& d_pre, LayerParams& grad, bool want_input_grad) {
  Matrix d_transformed;
  Vector d_score_logit;
  Vector d_loops;
  if (propagation == Propagation::fixed) {
    d_transformed = ops.structure.transpose() * d_pre;
    grad.score_weight.setZero(lp.score_weight.size());
    grad.score_bias = 0.0;
    grad.loop_weight.setZero(lp.loop_weight.size());
    grad.loop_bias = 0.0;
  } else {
    const Vector& s = t.score;
    const Vector complement = (1.0 - s.array()).matrix();
    const Vector d_score =
        d_pre.cwiseProduct(t.structure_part - t.feature_part).rowwise().sum();
    d_score_logit = d_score.cwiseProduct(s).cwiseProduct(complement);
    d_loops = gamma * d_pre.cwiseProduct(t.transformed).rowwise().sum();

    const Matrix via_structure = s.asDiagonal() * d_pre;
    const Matrix via_feature = complement.asDiagonal() * d_pre;
    const Vector loop_scale = gamma * t.loops;
    d_transformed = ops.structure.transpose() * via_structure;
    d_transformed.noalias() += ops.feature.transpose() * via_feature;
    d_transformed.noalias() += loop_scale.asDiagonal() * d_pre;

    grad.score_weight = input.transpose() * d_score_logit;
    grad.score_bias = d_score_logit.sum();
    grad.loop_weight = input.transpose() * d_loops;
    grad.loop_bias = d_loops.sum();
  }
  grad.weight = input.transpose() * d_transformed;

  if (!want_input_grad) return {};
  Matrix d_input = d_transformed * lp.weight.transpose();
  if (propagation == Propagation::adaptive) {
    d_input.noalias() += d_score_logit * lp.score_weight.transpose();
    d_input.noalias() += d_loops * lp.loop_weight.transpose();
  }
  return d_input;
}

void check_trace(const ForwardTrace& trace, const TrainingProblem& problem,
                 const ModelParams& params) {
  const Eigen::Index n = problem.features.rows();
  if (trace.input.rows() != n || trace.input.cols() != problem.features.cols() ||
      trace.logits.rows() != n ||
      trace.logits.cols() != static_cast<Eigen::Index>(params.num_classes()) ||
      trace.hidden.cols() != static_cast<Eigen::Index>(params.hidden_dim()) ||
      trace.propagation != problem.propagation) {
    throw DimensionError("backward: trace does not match the problem and parameters");
  }
}

template <typename Fn>
void zip_tensors(ModelParams& params, const GradientSet& grads, AdamState& state, Fn&& fn) {
  auto p = tensor_views(params);
  auto g = tensor_views(grads);
  auto m = tensor_views(state.first_moment);
  auto v = tensor_views(state.second_moment);
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (g[t].values.size() != p[t].values.size() || m[t].values.size() != p[t].values.size() ||
        v[t].values.size() != p[t].values.size()) {
      throw DimensionError("adam_step: shape mismatch in " + p[t].name);
    }
    for (std::size_t k = 0; k < p[t].values.size(); ++k) {
      fn(p[t].values[k], g[t].values[k], m[t].values[k], v[t].values[k]);
    }
  }
}

}  // namespace

GradientSet GradientSet::zeros_like(const ModelParams& params) {
  GradientSet g;
  for (std::size_t l = 0; l < params.layers.size(); ++l) g.layers[l] = zero_layer(params.layers[l]);
  g.ssl_head.weight = Vector::Zero(params.ssl_head.weight.size());
  g.ssl_head.bias = 0.0;
  return g;
}

LossBreakdown evaluate_objective(const TrainingProblem& problem, const ModelParams& params,
                                 const ForwardTrace& trace) {
  LossBreakdown loss;
  loss.classification = classification_loss(trace.logits, problem.labels, problem.train_nodes);
  if (!problem.pairs.empty()) loss.ssl = ssl_loss(trace.hidden, problem.pairs, params.ssl_head);
  for (const LayerParams& lp : params.layers) {
    loss.weight_penalty += 0.5 * problem.weight_decay * lp.weight.squaredNorm();
  }
  loss.total = total_loss(loss.classification, loss.ssl, params.lambda) + loss.weight_penalty;
  return loss;
}

LossBreakdown evaluate_objective(const TrainingProblem& problem, const ModelParams& params,
                                 const DropoutMasks* masks) {
  const ForwardTrace trace =
      forward(problem.features, problem.operators, params, problem.propagation, masks);
  return evaluate_objective(problem, params, trace);
}

GradientSet backward(const ForwardTrace& trace, const TrainingProblem& problem,
                     const ModelParams& params, const DropoutMasks* masks) {
  check_trace(trace, problem, params);
  GradientSet grads = GradientSet::zeros_like(params);

  const Matrix d_logits = classification_grad(trace.logits, problem.labels, problem.train_nodes);
  Matrix d_hidden_input =
      layer_backward(trace.hidden_input, params.layers[1], trace.layers[1], problem.operators,
                     params.gamma, problem.propagation, d_logits, grads.layers[1], true);

  Matrix d_hidden = masks != nullptr ? d_hidden_input.cwiseProduct(masks->hidden)
                                     : std::move(d_hidden_input);

  if (params.lambda != 0.0 && !problem.pairs.empty()) {
    const double scale = 2.0 * params.lambda / static_cast<double>(problem.pairs.size());
    const SslHead& head = params.ssl_head;
    for (const NodePair& p : problem.pairs.pairs) {
      const Eigen::RowVectorXd diff = trace.hidden.row(p.i) - trace.hidden.row(p.j);
      const double residual = diff.dot(head.weight) + head.bias - p.target;
      const double d_prediction = scale * residual;
      grads.ssl_head.weight += d_prediction * diff.transpose();
      grads.ssl_head.bias += d_prediction;
      d_hidden.row(p.i) += d_prediction * head.weight.transpose();
      d_hidden.row(p.j) -= d_prediction * head.weight.transpose();
    }
  }

  const Matrix d_pre1 =
      d_hidden.cwiseProduct((trace.layers[0].pre_activation.array() > 0.0).cast<double>().matrix());
  layer_backward(trace.input, params.layers[0], trace.layers[0], problem.operators, params.gamma,
                 problem.propagation, d_pre1, grads.layers[0], false);

  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    grads.layers[l].weight += problem.weight_decay * params.layers[l].weight;
  }
  return grads;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
  return {GradientSet::zeros_like(params), GradientSet::zeros_like(params), 0};
}

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const AdamConfig& config) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  zip_tensors(params, grads, state, [&](double& p, double g, double& m, double& v) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    p -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  });
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport check_gradients(const TrainingProblem& problem, const ModelParams& params,
                                const GradientSet& analytic, double step, double tolerance) {
  GradCheckReport report;
  report.tolerance = tolerance;
  ModelParams probe = params;
  auto probe_views = tensor_views(probe);
  const auto analytic_views = tensor_views(analytic);
  for (std::size_t t = 0; t < probe_views.size(); ++t) {
    for (std::size_t k = 0; k < probe_views[t].values.size(); ++k) {
      double& coord = probe_views[t].values[k];
      const double original = coord;
      coord = original + step;
      const double up = evaluate_objective(problem, probe).total;
      coord = original - step;
      const double down = evaluate_objective(problem, probe).total;
      coord = original;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic_views[t].values[k];
      const double err = relative_error(a, numeric);
      ++report.coordinates;
      if (err > report.max_rel_error || report.worst_tensor.empty()) {
        report.max_rel_error = std::max(err, report.max_rel_error);
        report.worst_tensor = probe_views[t].name;
        report.worst_index = k;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

GradCheckInstance make_gradcheck_instance(const GradCheckConfig& config) {
  const std::size_t n = config.num_nodes;
  if (n < 3 || config.num_classes < 2) {
    throw std::invalid_argument("gradcheck instance needs at least 3 nodes and 2 classes");
  }
  std::mt19937_64 rng(config.seed);
  auto uniform = [&rng](double lo, double hi) { return lo + (hi - lo) * detail::unit_uniform(rng); };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (uniform(0.0, 1.0) < 0.4) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
      }
    }
    const SparseGraph graph = SparseGraph::from_edges(n, edges);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(config.num_features));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = uniform(-1.0, 1.0);
    }
    const FeatureMatrix features(x);
    const SparseGraph feature_graph = build_knn_graph(features, config.knn_k);

    GradCheckInstance inst;
    inst.problem.features = x.sparseView();
    inst.problem.operators = GraphOperators::build(graph, feature_graph);
    inst.problem.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      inst.problem.labels[i] = static_cast<Label>(i % config.num_classes);
      if (uniform(0.0, 1.0) < 0.5) inst.problem.train_nodes.push_back(static_cast<NodeId>(i));
    }
    if (inst.problem.train_nodes.empty()) inst.problem.train_nodes.push_back(0);
    inst.problem.pairs = sample_pairs(features, config.pairs_m, config.seed);
    inst.problem.propagation = Propagation::adaptive;
    inst.problem.weight_decay = config.weight_decay;

    inst.params = init_params(config.num_features, config.hidden, config.num_classes, config.gamma,
                              config.lambda, 0.0, rng());
    // Nonzero biases so that every bias path is exercised.
    for (LayerParams& lp : inst.params.layers) {
      lp.score_bias = uniform(-0.5, 0.5);
      lp.loop_bias = uniform(-0.5, 0.5);
    }
    inst.params.ssl_head.bias = uniform(-0.5, 0.5);

    const ForwardTrace trace =
        forward(inst.problem.features, inst.problem.operators, inst.params, Propagation::adaptive);
    const double margin = trace.layers[0].pre_activation.cwiseAbs().minCoeff();
    const bool some_active = (trace.layers[0].pre_activation.array() > 0.0).any();
    if (margin > 1e-3 && some_active) return inst;
  }
  throw std::runtime_error("could not draw a gradcheck instance away from ReLU kinks");
}

GradCheckReport finite_diff_check(const GradCheckConfig& config) {
  const GradCheckInstance inst = make_gradcheck_instance(config);
  const ForwardTrace trace = forward(inst.problem.features, inst.problem.operators, inst.params,
                                     inst.problem.propagation);
  GradientSet grads = backward(trace, inst.problem, inst.params);
  if (config.corrupt) {
    double& g = grads.layers[0].weight(0, 0);
    g += 1e-2 * (1.0 + std::abs(g));
  }
  return check_gradients(inst.problem, inst.params, grads, config.step, config.tolerance);
}

}  // namespace simpgcn
