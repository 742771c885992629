#pragma once

#include "simpgcn/checkpoint.hpp"
#include "simpgcn/report.hpp"
#include "simpgcn/train.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace simpgcn {

/// Candidate values searched by --grid. Empty lists keep the base value.
struct HyperGrid {
  std::vector<std::size_t> hidden;
  std::vector<double> weight_decay;
  std::vector<double> lambda;
  std::vector<double> gamma;
  std::vector<double> score_bias_init;

  std::vector<TrainConfig> expand(const TrainConfig& base) const;
};

struct Preset {
  std::string family;  ///< "assortative" or "disassortative"
  TrainConfig config;
  SplitPolicy split = SplitPolicy::planetoid;
  HyperGrid grid;
};

/// Cora, Citeseer and Pubmed use the assortative preset; Cornell, Texas,
/// Wisconsin, Actor (film), Chameleon and Squirrel the disassortative one.
/// Unknown names fall back to assortative.
Preset preset_for(const std::string& dataset_name);

/// Where the dataset was loaded from, so canonical split files can be found.
struct ExperimentData {
  Dataset dataset;
  std::filesystem::path directory;
};

/// Split for run `run` (0-based) under `policy`.
Split split_for_run(const ExperimentData& data, SplitPolicy policy, std::uint64_t seed,
                    std::size_t run);

struct RunOutcome {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool canonical_split = false;
  TrainResult result;
};

/// Trains `runs` models; run r uses seed `config.seed + r` for both its model
/// and (under the random policy) its split.
std::vector<RunOutcome> run_many(const ExperimentData& data, const PreparedInputs& inputs,
                                 const TrainConfig& config, SplitPolicy policy, std::size_t runs);

/// Appends "run" records and a "summary" record (mean and population std of
/// best-epoch test accuracy in percent, plus validation and final-epoch test).
void append_runs(Report& report, const std::vector<RunOutcome>& runs, const std::string& label);

struct GridResult {
  TrainConfig best;
  double best_val = -1.0;
  std::vector<std::pair<TrainConfig, double>> scored;  ///< config and mean val accuracy
};

/// Scores every grid point by mean validation accuracy over `runs`; the first
/// point in expansion order wins ties.
GridResult grid_search(const ExperimentData& data, const PreparedInputs& inputs,
                       const TrainConfig& base, const HyperGrid& grid, SplitPolicy policy,
                       std::size_t runs);

struct OverlapResult {
  double features_hidden = 0.0;   ///< OL(A_f, A_h)
  double hidden_structure = 0.0;  ///< OL(A_h, A)
  double features_structure = 0.0; ///< OL(A_f, A)
  std::size_t k = 0;
};

/// Builds A_f from the raw features and A_h from the final-layer logits of
/// `params`, both as symmetrized kNN graphs with degree `k`.
OverlapResult analyze_overlap(const Dataset& ds, const PreparedInputs& inputs,
                              const ModelParams& params, ModelVariant variant, std::size_t k);

struct ValueSummary {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double lo = 0.0;  ///< histogram range
  double hi = 0.0;
  std::array<std::size_t, 10> counts{};
};

/// Ranges and 10-bin histograms of s1, s2 (over [0, 1]) and gamma*K1,
/// gamma*K2 (over their own range) for a dropout-free forward pass.
/// Throws std::invalid_argument unless `ckpt` holds a simp model.
std::vector<ValueSummary> inspect_scores(const Dataset& ds, const PreparedInputs& inputs,
                                         const Checkpoint& ckpt);

struct AblationRow {
  std::string name;
  TrainConfig config;
  std::vector<RunOutcome> runs;
  MeanStd test;  ///< percent
};

/// Full model, SSL without self-loops, self-loops without SSL, neither, and
/// plain GCN, each trained `runs` times from `base`.
std::vector<AblationRow> ablation(const ExperimentData& data, const PreparedInputs& inputs,
                                  const TrainConfig& base, SplitPolicy policy, std::size_t runs);

struct SmoothnessRow {
  std::string signal;
  double mean_normalized = 0.0;  ///< mean over columns of f^T L f / f^T f
  std::size_t columns = 0;
};

/// Normalized smoothness of the feature columns of X, P X and P^2 X with
/// P the self-looped normalized adjacency, plus the columns of `logits`
/// when given. Zero columns are skipped.
std::vector<SmoothnessRow> smoothness_profile(const Dataset& ds, const Matrix* logits);

/// Removes round(fraction * m) random edges and adds as many random non-edges.
/// Not an adversarial attack; for robustness smoke tests only.
SparseGraph perturb_random(const SparseGraph& g, double fraction, std::uint64_t seed);

}  // namespace simpgcn
