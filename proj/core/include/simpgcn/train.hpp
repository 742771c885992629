#pragma once

#include "simpgcn/data_io.hpp"
#include "simpgcn/diff_engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simpgcn {

/// Which model a run trains.
///  - simp: adaptive propagation over A and the kNN feature graph A_f, with
///    learned self-loops and the similarity-regression loss.
///  - gcn: plain two-layer GCN on A.
///  - knn_gcn: plain GCN on A_f.
///  - a_plus_knn_gcn: plain GCN on A + A_f (weights summed on shared edges).
enum class ModelVariant { simp, gcn, knn_gcn, a_plus_knn_gcn };

std::string_view to_string(ModelVariant v);
/// Accepts "simp", "gcn", "knn-gcn", "a-plus-knn-gcn". Throws std::invalid_argument.
ModelVariant parse_variant(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  std::size_t epochs = 200;
  std::optional<std::size_t> patience;
  std::size_t hidden = 128;
  std::size_t k = 20;  ///< kNN feature-graph degree
  std::size_t m = 5;   ///< pairs per node per polarity
  double lambda = 1.0;
  double gamma = 0.1;
  double score_bias_init = 0.0;
  std::uint64_t seed = 0;
  ModelVariant variant = ModelVariant::simp;
  /// Scale every feature row to unit L1 norm before it enters the model.
  bool normalize_features = true;

  /// Throws std::invalid_argument on non-positive rates or counts, dropout
  /// outside [0, 1), negative lambda/gamma/weight decay, or patience > epochs.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Per-dataset preprocessing shared by every run with the same k, m and
/// feature normalization.
struct PreparedInputs {
  SparseRowMatrix features;  ///< model input, possibly row-normalized
  SparseGraph feature_graph; ///< kNN graph over the raw features
  PairSet pairs;             ///< similarity-regression pairs over the raw features
  std::size_t k = 0;
  std::size_t m = 0;
  bool normalized = false;
};

PreparedInputs prepare_inputs(const Dataset& ds, std::size_t k, std::size_t m,
                              bool normalize_features);

/// Builds the objective for one variant. Plain-GCN variants use fixed
/// propagation and no pairs.
TrainingProblem make_problem(const Dataset& ds, const PreparedInputs& inputs, const Split& split,
                             const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double total_loss = 0.0;
  double classification_loss = 0.0;
  double ssl_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
  double test_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  ///< 1-based index into `epochs`
  bool stopped_early = false;
};

struct TrainResult {
  ModelParams params;  ///< parameters from the best validation epoch
  TrainHistory history;
  double val_accuracy = 0.0;   ///< at the best epoch
  double test_accuracy = 0.0;  ///< at the best epoch
  double final_test_accuracy = 0.0;
};

/// Full-batch Adam training. Losses are recorded from the dropout forward
/// pass that produced the step; accuracies come from a dropout-free pass after
/// the step. The returned parameters are those with the highest validation
/// accuracy, ties going to the lower validation loss and then the earlier
/// epoch. With patience set, training stops once that many epochs pass
/// without improvement. Bitwise deterministic in `config.seed`.
/// Throws std::invalid_argument on an invalid split or config.
TrainResult train(const Dataset& ds, const PreparedInputs& inputs, const Split& split,
                  const TrainConfig& config);
TrainResult train(const Dataset& ds, const Split& split, const TrainConfig& config);

/// Dropout-free logits of `params` under the configured variant.
Matrix predict(const Dataset& ds, const PreparedInputs& inputs, const ModelParams& params,
               ModelVariant variant);

}  // namespace simpgcn
