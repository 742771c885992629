#pragma once

#include "simpgcn/model.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace simpgcn {

/// One gradient tensor per trainable tensor of ModelParams, same shapes.
struct GradientSet {
  std::array<LayerParams, 2> layers;
  SslHead ssl_head;

  static GradientSet zeros_like(const ModelParams& params);
};

/// Everything the objective needs besides the parameters.
struct TrainingProblem {
  SparseRowMatrix features;
  GraphOperators operators;
  std::vector<Label> labels;
  std::vector<NodeId> train_nodes;
  PairSet pairs;
  Propagation propagation = Propagation::adaptive;
  double weight_decay = 0.0;  ///< L2 coefficient on the layer weights W only
};

struct LossBreakdown {
  double classification = 0.0;
  double ssl = 0.0;             ///< unweighted; 0 when there are no pairs
  double weight_penalty = 0.0;  ///< (weight_decay / 2) sum_l ||W_l||^2
  double total = 0.0;           ///< classification + lambda ssl + weight_penalty
};

/// Named flat view of one trainable tensor.
template <typename Scalar>
struct TensorView {
  std::string name;
  std::span<Scalar> values;
};

/// Flat views over every trainable tensor, in a fixed order. Works for
/// ModelParams and GradientSet, const or not.
template <typename Params>
auto tensor_views(Params& p) {
  using Scalar = std::conditional_t<std::is_const_v<Params>, const double, double>;
  std::vector<TensorView<Scalar>> views;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    const std::string prefix = "layer" + std::to_string(l + 1) + ".";
    views.push_back({prefix + "weight", {layer.weight.data(), static_cast<std::size_t>(layer.weight.size())}});
    views.push_back({prefix + "score_weight",
                     {layer.score_weight.data(), static_cast<std::size_t>(layer.score_weight.size())}});
    views.push_back({prefix + "score_bias", {&layer.score_bias, 1}});
    views.push_back({prefix + "loop_weight",
                     {layer.loop_weight.data(), static_cast<std::size_t>(layer.loop_weight.size())}});
    views.push_back({prefix + "loop_bias", {&layer.loop_bias, 1}});
  }
  views.push_back({"ssl_head.weight",
                   {p.ssl_head.weight.data(), static_cast<std::size_t>(p.ssl_head.weight.size())}});
  views.push_back({"ssl_head.bias", {&p.ssl_head.bias, 1}});
  return views;
}

/// Loss terms for an existing trace.
LossBreakdown evaluate_objective(const TrainingProblem& problem, const ModelParams& params,
                                 const ForwardTrace& trace);
/// Runs a forward pass (dropout-free unless `masks` is given) and evaluates it.
LossBreakdown evaluate_objective(const TrainingProblem& problem, const ModelParams& params,
                                 const DropoutMasks* masks = nullptr);

/// Exact gradient of the total objective with respect to every trainable
/// tensor, reusing the activations stored in `trace`. Pass the same `masks`
/// that produced the trace. Throws DimensionError if the trace was not produced
/// from `params` and `problem`.
GradientSet backward(const ForwardTrace& trace, const TrainingProblem& problem,
                     const ModelParams& params, const DropoutMasks* masks = nullptr);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  GradientSet first_moment;
  GradientSet second_moment;
  std::int64_t step = 0;

  static AdamState zeros_like(const ModelParams& params);
};

/// Bias-corrected Adam update applied in place.
void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const AdamConfig& config = {});

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// |a - n| / max(|a|, |n|, 1e-7).
double relative_error(double analytic, double numeric);

/// Central differences on every coordinate of every trainable tensor,
/// compared against `analytic`. Dropout is off.
GradCheckReport check_gradients(const TrainingProblem& problem, const ModelParams& params,
                                const GradientSet& analytic, double step, double tolerance);

struct GradCheckConfig {
  std::size_t num_nodes = 6;
  std::size_t num_features = 4;
  std::size_t hidden = 3;
  std::size_t num_classes = 2;
  double lambda = 1.0;
  double gamma = 0.1;
  double weight_decay = 5e-4;
  std::size_t knn_k = 2;
  std::size_t pairs_m = 2;
  std::uint64_t seed = 0;
  double step = 1e-5;
  double tolerance = 1e-4;
  bool corrupt = false;  ///< perturb one analytic coordinate (negative control)
};

struct GradCheckInstance {
  TrainingProblem problem;
  ModelParams params;
};

/// Random small problem whose layer-1 pre-activations all sit at least 1e-3
/// away from the ReLU kink, so central differences are well defined.
GradCheckInstance make_gradcheck_instance(const GradCheckConfig& config);

GradCheckReport finite_diff_check(const GradCheckConfig& config);

}  // namespace simpgcn
