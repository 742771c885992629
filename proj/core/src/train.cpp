#include "simpgcn/train.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace simpgcn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("train config: " + msg);
}

GraphOperators operators_for(const Dataset& ds, const PreparedInputs& inputs,
                             ModelVariant variant) {
  switch (variant) {
    case ModelVariant::simp:
      return GraphOperators::build(ds.graph, inputs.feature_graph);
    case ModelVariant::gcn:
      return GraphOperators::structure_only(ds.graph);
    case ModelVariant::knn_gcn:
      return GraphOperators::structure_only(inputs.feature_graph);
    case ModelVariant::a_plus_knn_gcn:
      return GraphOperators::structure_only(add_graphs(ds.graph, inputs.feature_graph));
  }
  throw std::invalid_argument("unknown model variant");
}

Propagation propagation_for(ModelVariant variant) {
  return variant == ModelVariant::simp ? Propagation::adaptive : Propagation::fixed;
}

bool better(const EpochRecord& candidate, const EpochRecord& best) {
  if (candidate.val_accuracy != best.val_accuracy) return candidate.val_accuracy > best.val_accuracy;
  return candidate.val_loss < best.val_loss;
}

}  // namespace

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::simp: return "simp";
    case ModelVariant::gcn: return "gcn";
    case ModelVariant::knn_gcn: return "knn-gcn";
    case ModelVariant::a_plus_knn_gcn: return "a-plus-knn-gcn";
  }
  return "unknown";
}

ModelVariant parse_variant(std::string_view name) {
  for (ModelVariant v : {ModelVariant::simp, ModelVariant::gcn, ModelVariant::knn_gcn,
                         ModelVariant::a_plus_knn_gcn}) {
    if (name == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) +
                              "' (expected simp, gcn, knn-gcn or a-plus-knn-gcn)");
}

void TrainConfig::validate() const {
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning rate must be positive");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0, "weight decay must be >= 0");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(epochs >= 1, "epochs must be positive");
  require(!patience || (*patience >= 1 && *patience <= epochs),
          "patience must lie in [1, epochs]");
  require(hidden >= 1, "hidden width must be positive");
  require(k >= 1, "k must be positive");
  require(m >= 1, "m must be positive");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
  require(std::isfinite(score_bias_init), "score bias init must be finite");
}

PreparedInputs prepare_inputs(const Dataset& ds, std::size_t k, std::size_t m,
                              bool normalize_features) {
  ds.validate();
  PreparedInputs in;
  const FeatureMatrix model_input = normalize_features ? ds.features.row_normalized() : ds.features;
  in.features = model_input.values().sparseView();
  in.features.makeCompressed();
  in.feature_graph = build_knn_graph(ds.features, k);
  in.pairs = sample_pairs(ds.features, m, 0);
  in.k = k;
  in.m = m;
  in.normalized = normalize_features;
  return in;
}

TrainingProblem make_problem(const Dataset& ds, const PreparedInputs& inputs, const Split& split,
                             const TrainConfig& config) {
  TrainingProblem p;
  p.features = inputs.features;
  p.operators = operators_for(ds, inputs, config.variant);
  p.labels = ds.labels;
  p.train_nodes = split.train;
  if (config.variant == ModelVariant::simp) p.pairs = inputs.pairs;
  p.propagation = propagation_for(config.variant);
  p.weight_decay = config.weight_decay;
  return p;
}

Matrix predict(const Dataset& ds, const PreparedInputs& inputs, const ModelParams& params,
               ModelVariant variant) {
  const GraphOperators ops = operators_for(ds, inputs, variant);
  return forward(inputs.features, ops, params, propagation_for(variant)).logits;
}

TrainResult train(const Dataset& ds, const PreparedInputs& inputs, const Split& split,
                  const TrainConfig& config) {
  config.validate();
  ds.validate();
  split.validate(ds.num_nodes());
  if (inputs.features.rows() != static_cast<Eigen::Index>(ds.num_nodes())) {
    throw DimensionError("prepared inputs do not belong to this dataset");
  }
  if ((config.variant != ModelVariant::gcn && inputs.k != config.k) ||
      (config.variant == ModelVariant::simp && inputs.m != config.m)) {
    throw std::invalid_argument("prepared inputs were built with a different k or m");
  }

  const TrainingProblem problem = make_problem(ds, inputs, split, config);
  const bool simp = config.variant == ModelVariant::simp;

  std::mt19937_64 rng(config.seed);
  ModelParams params =
      init_params(ds.features.num_features(), config.hidden, ds.num_classes,
                  simp ? config.gamma : 0.0, simp ? config.lambda : 0.0,
                  simp ? config.score_bias_init : 0.0, rng());
  AdamState adam = AdamState::zeros_like(params);
  const AdamConfig adam_config{config.learning_rate, 0.9, 0.999, 1e-8};

  TrainResult result;
  result.params = params;
  EpochRecord best;
  best.val_accuracy = -1.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    DropoutMasks masks;
    const DropoutMasks* mask_ptr = nullptr;
    if (config.dropout > 0.0) {
      masks = sample_dropout(problem.features.nonZeros(), problem.features.rows(),
                             static_cast<Eigen::Index>(config.hidden), config.dropout, rng);
      mask_ptr = &masks;
    }
    const ForwardTrace trace =
        forward(problem.features, problem.operators, params, problem.propagation, mask_ptr);
    const LossBreakdown loss = evaluate_objective(problem, params, trace);
    const GradientSet grads = backward(trace, problem, params, mask_ptr);
    adam_step(params, grads, adam, adam_config);

    const Matrix logits =
        forward(problem.features, problem.operators, params, problem.propagation).logits;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.total_loss = loss.total;
    rec.classification_loss = loss.classification;
    rec.ssl_loss = loss.ssl;
    rec.train_accuracy = accuracy(logits, ds.labels, split.train);
    rec.val_accuracy = accuracy(logits, ds.labels, split.val);
    rec.val_loss = split.val.empty() ? 0.0 : classification_loss(logits, ds.labels, split.val);
    rec.test_accuracy = accuracy(logits, ds.labels, split.test);
    result.history.epochs.push_back(rec);

    if (epoch == 1 || better(rec, best)) {
      best = rec;
      result.params = params;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience && ++since_best >= *config.patience) {
      result.history.stopped_early = true;
      break;
    }
  }

  result.val_accuracy = best.val_accuracy;
  result.test_accuracy = best.test_accuracy;
  result.final_test_accuracy = result.history.epochs.back().test_accuracy;
  return result;
}

TrainResult train(const Dataset& ds, const Split& split, const TrainConfig& config) {
  config.validate();
  const PreparedInputs inputs = prepare_inputs(ds, config.k, config.m, config.normalize_features);
  return train(ds, inputs, split, config);
}

}  // namespace simpgcn
