// simpgcn: train, evaluate and diagnose SimP-GCN models from the command line.

#include "simpgcn/checkpoint.hpp"
#include "simpgcn/data_io.hpp"
#include "simpgcn/diff_engine.hpp"
#include "simpgcn/experiments.hpp"
#include "simpgcn/report.hpp"
#include "simpgcn/train.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace simpgcn;

constexpr const char* kHiddenNote = "final-layer logits";

/// Flags shared by every training command. Unset flags keep the preset value.
struct TrainFlags {
  std::string dataset;
  std::string mode = "simp";
  std::string split;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::optional<double> lambda, gamma, lr, weight_decay, dropout, b_s_init, perturb;
  std::optional<std::size_t> k, m, hidden, epochs, patience;
  bool no_patience = false;
  bool grid = false;
  bool raw_features = false;
  std::string out;
  std::string checkpoint;
  std::string history;

  void add_to(CLI::App* cmd, bool with_mode) {
    cmd->add_option("dataset,--dataset", dataset,
                    "Dataset directory, or a name under $SIMPGCN_DATA_ROOT")->required();
    if (with_mode) {
      cmd->add_option("--mode", mode, "simp | gcn | knn-gcn | a-plus-knn-gcn")
          ->check(CLI::IsMember({"simp", "gcn", "knn-gcn", "a-plus-knn-gcn"}));
    }
    cmd->add_option("--split", split, "planetoid | random (default: the dataset preset)")
        ->check(CLI::IsMember({"planetoid", "random"}));
    cmd->add_option("--runs", runs, "Number of seeded runs")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Base seed; run r uses seed + r");
    cmd->add_option("--lambda", lambda, "Weight of the similarity-regression loss")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--gamma", gamma, "Self-loop scale")->check(CLI::NonNegativeNumber);
    cmd->add_option("--k", k, "kNN feature-graph degree")->check(CLI::PositiveNumber);
    cmd->add_option("--m", m, "Similar and dissimilar pairs per node")->check(CLI::PositiveNumber);
    cmd->add_option("--hidden", hidden, "Hidden width")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--weight-decay", weight_decay, "L2 coefficient on layer weights")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--dropout", dropout, "Dropout rate in [0, 1)")->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--patience", patience, "Early-stopping patience")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-patience", no_patience, "Disable early stopping");
    cmd->add_option("--b-s-init", b_s_init, "Initial score bias");
    cmd->add_flag("--grid", grid, "Search the preset grid on validation accuracy first");
    cmd->add_flag("--raw-features", raw_features, "Skip L1 row normalization of the model input");
    cmd->add_option("--perturb-random", perturb,
                    "Replace this fraction of edges with random non-edges (not an adversarial attack)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--out", out, "Report path (line-delimited JSON)");
  }

  TrainConfig apply(TrainConfig c) const {
    c.variant = parse_variant(mode);
    c.seed = seed;
    if (lambda) c.lambda = *lambda;
    if (gamma) c.gamma = *gamma;
    if (lr) c.learning_rate = *lr;
    if (weight_decay) c.weight_decay = *weight_decay;
    if (dropout) c.dropout = *dropout;
    if (b_s_init) c.score_bias_init = *b_s_init;
    if (k) c.k = *k;
    if (m) c.m = *m;
    if (hidden) c.hidden = *hidden;
    if (epochs) c.epochs = *epochs;
    if (patience) c.patience = *patience;
    if (no_patience) c.patience.reset();
    if (c.patience && *c.patience > c.epochs) c.patience = c.epochs;
    if (raw_features) c.normalize_features = false;
    c.validate();
    return c;
  }
};

ExperimentData load(const std::string& arg) {
  const auto dir = resolve_dataset(arg);
  if (!dir) {
    throw std::runtime_error("dataset '" + arg + "' not found (looked for a directory and under $" +
                             std::string(kDataRootEnv) + ")");
  }
  return {load_dataset(*dir), *dir};
}

void perturb_if_requested(ExperimentData& data, const TrainFlags& f) {
  if (f.perturb) data.dataset.graph = perturb_random(data.dataset.graph, *f.perturb, f.seed);
}

Record& header(Report& report, const std::string& command, const ExperimentData& data) {
  const Dataset& ds = data.dataset;
  return report.add("header")
      .set("command", command)
      .set("dataset", ds.name)
      .set("nodes", static_cast<std::int64_t>(ds.num_nodes()))
      .set("edges", static_cast<std::int64_t>(ds.graph.num_edges()))
      .set("features", static_cast<std::int64_t>(ds.features.num_features()))
      .set("classes", static_cast<std::int64_t>(ds.num_classes));
}

void emit(const Report& report, const std::string& out) {
  if (out.empty()) return;
  write_report(out, report);
  std::cout << "report written to " << out << '\n';
}

void print_summary(const std::string& label, const std::vector<RunOutcome>& runs) {
  std::vector<double> test;
  for (const auto& r : runs) test.push_back(100.0 * r.result.test_accuracy);
  const MeanStd s = mean_std(test);
  std::printf("%-18s test acc %6.2f +- %5.2f  (%zu runs)\n", label.c_str(), s.mean, s.std,
              runs.size());
}

struct Resolved {
  Preset preset;
  TrainConfig config;
};

Resolved resolve_config(const ExperimentData& data, const TrainFlags& f) {
  Resolved r{preset_for(data.dataset.name), {}};
  r.config = f.apply(r.preset.config);
  if (!f.split.empty()) r.preset.split = parse_split_policy(f.split);
  return r;
}

int cmd_train(const TrainFlags& f) {
  ExperimentData data = load(f.dataset);
  perturb_if_requested(data, f);
  Resolved rc = resolve_config(data, f);
  const PreparedInputs inputs =
      prepare_inputs(data.dataset, rc.config.k, rc.config.m, rc.config.normalize_features);

  Report report;
  header(report, "train", data)
      .set("preset", rc.preset.family)
      .set("split_policy", std::string(to_string(rc.preset.split)))
      .set("perturb_random", f.perturb.value_or(0.0));

  if (f.grid) {
    const GridResult g =
        grid_search(data, inputs, rc.config, rc.preset.grid, rc.preset.split, f.runs);
    for (const auto& [c, score] : g.scored) {
      Record& rec = report.add("grid");
      for (const auto& [key, value] : config_record(c).fields) rec.set(key, value);
      rec.set("val_acc_mean", 100.0 * score);
    }
    rc.config = g.best;
  }
  report.records.push_back(config_record(rc.config));

  const auto runs = run_many(data, inputs, rc.config, rc.preset.split, f.runs);
  append_runs(report, runs, std::string(to_string(rc.config.variant)));
  print_summary(std::string(to_string(rc.config.variant)), runs);

  if (!f.checkpoint.empty()) {
    TrainConfig c = rc.config;
    c.seed = runs.front().seed;
    write_checkpoint(f.checkpoint, {data.dataset.name, rc.preset.split, c, runs.front().result.params});
  }
  if (!f.history.empty()) write_history(f.history, runs.front().result.history);
  emit(report, f.out);
  return 0;
}

int cmd_knn_baseline(TrainFlags f) {
  ExperimentData data = load(f.dataset);
  perturb_if_requested(data, f);
  Resolved rc = resolve_config(data, f);
  const PreparedInputs inputs =
      prepare_inputs(data.dataset, rc.config.k, rc.config.m, rc.config.normalize_features);
  Report report;
  header(report, "knn-baseline", data)
      .set("split_policy", std::string(to_string(rc.preset.split)));
  for (ModelVariant v : {ModelVariant::knn_gcn, ModelVariant::a_plus_knn_gcn}) {
    TrainConfig c = rc.config;
    c.variant = v;
    report.records.push_back(config_record(c));
    const auto runs = run_many(data, inputs, c, rc.preset.split, f.runs);
    append_runs(report, runs, std::string(to_string(v)));
    print_summary(std::string(to_string(v)), runs);
  }
  emit(report, f.out);
  return 0;
}

int cmd_ablate(const TrainFlags& f) {
  ExperimentData data = load(f.dataset);
  perturb_if_requested(data, f);
  Resolved rc = resolve_config(data, f);
  rc.config.variant = ModelVariant::simp;
  const PreparedInputs inputs =
      prepare_inputs(data.dataset, rc.config.k, rc.config.m, rc.config.normalize_features);
  Report report;
  header(report, "ablate", data).set("split_policy", std::string(to_string(rc.preset.split)));
  report.records.push_back(config_record(rc.config));
  for (const AblationRow& row : ablation(data, inputs, rc.config, rc.preset.split, f.runs)) {
    append_runs(report, row.runs, row.name);
    print_summary(row.name, row.runs);
  }
  emit(report, f.out);
  return 0;
}

struct CheckpointFlags {
  std::string dataset;
  std::string checkpoint;
  std::size_t k = 3;
  std::string out;
};

ExperimentData load_for_checkpoint(const std::string& dataset_flag, const Checkpoint& ckpt) {
  return load(dataset_flag.empty() ? ckpt.dataset : dataset_flag);
}

int cmd_eval(const CheckpointFlags& f) {
  const Checkpoint ckpt = read_checkpoint(f.checkpoint);
  const ExperimentData data = load_for_checkpoint(f.dataset, ckpt);
  const Split split = split_for_run(data, ckpt.split, ckpt.config.seed, 0);
  const PreparedInputs inputs = prepare_inputs(data.dataset, ckpt.config.k, ckpt.config.m,
                                               ckpt.config.normalize_features);
  const Matrix logits = predict(data.dataset, inputs, ckpt.params, ckpt.config.variant);
  const auto& y = data.dataset.labels;
  Report report;
  header(report, "eval", data).set("split_policy", std::string(to_string(ckpt.split)));
  report.records.push_back(config_record(ckpt.config));
  report.add("eval")
      .set("split", std::string(split.canonical ? "canonical" : "generated"))
      .set("train_acc", 100.0 * accuracy(logits, y, split.train))
      .set("val_acc", 100.0 * accuracy(logits, y, split.val))
      .set("test_acc", 100.0 * accuracy(logits, y, split.test));
  std::printf("train %.2f  val %.2f  test %.2f\n", 100.0 * accuracy(logits, y, split.train),
              100.0 * accuracy(logits, y, split.val), 100.0 * accuracy(logits, y, split.test));
  emit(report, f.out);
  return 0;
}

int cmd_analyze_overlap(const CheckpointFlags& f) {
  const Checkpoint ckpt = read_checkpoint(f.checkpoint);
  const ExperimentData data = load_for_checkpoint(f.dataset, ckpt);
  const PreparedInputs inputs = prepare_inputs(data.dataset, ckpt.config.k, ckpt.config.m,
                                               ckpt.config.normalize_features);
  const OverlapResult r =
      analyze_overlap(data.dataset, inputs, ckpt.params, ckpt.config.variant, f.k);
  Report report;
  header(report, "analyze-overlap", data)
      .set("model", std::string(to_string(ckpt.config.variant)))
      .set("k", static_cast<std::int64_t>(f.k))
      .set("hidden_representation", std::string(kHiddenNote));
  report.add("overlap")
      .set("ol_af_ah", 100.0 * r.features_hidden)
      .set("ol_ah_a", 100.0 * r.hidden_structure)
      .set("ol_af_a", 100.0 * r.features_structure);
  std::printf("OL(A_f, A_h) %6.2f%%\nOL(A_h, A)   %6.2f%%\nOL(A_f, A)   %6.2f%%\n",
              100.0 * r.features_hidden, 100.0 * r.hidden_structure, 100.0 * r.features_structure);
  emit(report, f.out);
  return 0;
}

int cmd_inspect_scores(const CheckpointFlags& f) {
  const Checkpoint ckpt = read_checkpoint(f.checkpoint);
  if (ckpt.config.variant != ModelVariant::simp) {
    throw std::invalid_argument("checkpoint holds a '" + std::string(to_string(ckpt.config.variant)) +
                                "' model; inspect-scores needs a simp model");
  }
  const ExperimentData data = load_for_checkpoint(f.dataset, ckpt);
  const PreparedInputs inputs = prepare_inputs(data.dataset, ckpt.config.k, ckpt.config.m,
                                               ckpt.config.normalize_features);
  Report report;
  header(report, "inspect-scores", data);
  for (const ValueSummary& v : inspect_scores(data.dataset, inputs, ckpt)) {
    Record& rec = report.add("values")
                      .set("name", v.name)
                      .set("min", v.min)
                      .set("max", v.max)
                      .set("hist_lo", v.lo)
                      .set("hist_hi", v.hi);
    std::string hist;
    for (std::size_t b = 0; b < v.counts.size(); ++b) {
      rec.set("bin" + std::to_string(b), static_cast<std::int64_t>(v.counts[b]));
      hist += (b ? " " : "") + std::to_string(v.counts[b]);
    }
    std::printf("%-7s min %9.5f  max %9.5f  hist[%g, %g]: %s\n", v.name.c_str(), v.min, v.max,
                v.lo, v.hi, hist.c_str());
  }
  emit(report, f.out);
  return 0;
}

int cmd_smoothness(const CheckpointFlags& f) {
  std::optional<Checkpoint> ckpt;
  if (!f.checkpoint.empty()) ckpt = read_checkpoint(f.checkpoint);
  if (f.dataset.empty() && !ckpt) throw std::invalid_argument("give a dataset or a checkpoint");
  const ExperimentData data = f.dataset.empty() ? load(ckpt->dataset) : load(f.dataset);
  std::optional<Matrix> logits;
  if (ckpt) {
    const PreparedInputs inputs = prepare_inputs(data.dataset, ckpt->config.k, ckpt->config.m,
                                                 ckpt->config.normalize_features);
    logits = predict(data.dataset, inputs, ckpt->params, ckpt->config.variant);
  }
  Report report;
  header(report, "smoothness", data);
  for (const SmoothnessRow& row : smoothness_profile(data.dataset, logits ? &*logits : nullptr)) {
    report.add("smoothness")
        .set("signal", row.signal)
        .set("mean_normalized", row.mean_normalized)
        .set("columns", static_cast<std::int64_t>(row.columns));
    std::printf("%-7s mean f'Lf/f'f = %.6f over %zu columns\n", row.signal.c_str(),
                row.mean_normalized, row.columns);
  }
  emit(report, f.out);
  return 0;
}

struct GradcheckFlags {
  std::uint64_t seed = 0;
  bool corrupt = false;
  double tolerance = 1e-4;
  std::string out;
};

int cmd_gradcheck(const GradcheckFlags& f) {
  GradCheckConfig c;
  c.seed = f.seed;
  c.corrupt = f.corrupt;
  c.tolerance = f.tolerance;
  const GradCheckReport r = finite_diff_check(c);
  Report report;
  report.add("header").set("command", std::string("gradcheck"));
  report.add("gradcheck")
      .set("seed", static_cast<std::int64_t>(f.seed))
      .set("corrupt", f.corrupt)
      .set("coordinates", static_cast<std::int64_t>(r.coordinates))
      .set("max_rel_error", r.max_rel_error)
      .set("worst_tensor", r.worst_tensor)
      .set("worst_index", static_cast<std::int64_t>(r.worst_index))
      .set("tolerance", r.tolerance)
      .set("passed", r.passed);
  std::printf("%s: max relative error %.3e over %zu coordinates (worst %s[%zu], tolerance %.0e)\n",
              r.passed ? "PASS" : "FAIL", r.max_rel_error, r.coordinates, r.worst_tensor.c_str(),
              r.worst_index, r.tolerance);
  emit(report, f.out);
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SimP-GCN training and diagnostics"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train N seeded models and report accuracy");
  train_flags.add_to(train, true);
  train->add_option("--checkpoint", train_flags.checkpoint, "Save the first run's model here");
  train->add_option("--history", train_flags.history, "Write the first run's epoch history here");

  TrainFlags knn_flags;
  auto* knn = app.add_subcommand("knn-baseline", "Train GCN on A_f and on A + A_f");
  knn_flags.add_to(knn, false);

  TrainFlags ablate_flags;
  auto* ablate = app.add_subcommand("ablate", "SSL and self-loop ablations plus plain GCN");
  ablate_flags.add_to(ablate, false);

  CheckpointFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on its split");
  eval->add_option("--checkpoint", eval_flags.checkpoint, "Checkpoint path")->required();
  eval->add_option("dataset,--dataset", eval_flags.dataset, "Override the checkpoint's dataset");
  eval->add_option("--out", eval_flags.out, "Report path");

  CheckpointFlags overlap_flags;
  auto* ov = app.add_subcommand("analyze-overlap", "Overlap of A, A_f and the hidden kNN graph");
  ov->add_option("--checkpoint", overlap_flags.checkpoint, "Checkpoint path")->required();
  ov->add_option("dataset,--dataset", overlap_flags.dataset, "Override the checkpoint's dataset");
  ov->add_option("--k", overlap_flags.k, "kNN degree for A_f and A_h")->check(CLI::PositiveNumber);
  ov->add_option("--out", overlap_flags.out, "Report path");

  CheckpointFlags smooth_flags;
  auto* sm = app.add_subcommand("smoothness", "Laplacian smoothness of X, PX, PPX and logits");
  sm->add_option("dataset,--dataset", smooth_flags.dataset, "Dataset directory or name");
  sm->add_option("--checkpoint", smooth_flags.checkpoint, "Also profile this model's logits");
  sm->add_option("--out", smooth_flags.out, "Report path");

  CheckpointFlags scores_flags;
  auto* sc = app.add_subcommand("inspect-scores", "Ranges of the learned scores and self-loops");
  sc->add_option("--checkpoint", scores_flags.checkpoint, "Checkpoint path")->required();
  sc->add_option("dataset,--dataset", scores_flags.dataset, "Override the checkpoint's dataset");
  sc->add_option("--out", scores_flags.out, "Report path");

  GradcheckFlags grad_flags;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gc->add_option("--seed", grad_flags.seed, "Instance seed");
  gc->add_flag("--corrupt", grad_flags.corrupt, "Perturb one analytic gradient (must fail)");
  gc->add_option("--tolerance", grad_flags.tolerance, "Maximum relative error")
      ->check(CLI::PositiveNumber);
  gc->add_option("--out", grad_flags.out, "Report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(train_flags);
    if (knn->parsed()) return cmd_knn_baseline(knn_flags);
    if (ablate->parsed()) return cmd_ablate(ablate_flags);
    if (eval->parsed()) return cmd_eval(eval_flags);
    if (ov->parsed()) return cmd_analyze_overlap(overlap_flags);
    if (sm->parsed()) return cmd_smoothness(smooth_flags);
    if (sc->parsed()) return cmd_inspect_scores(scores_flags);
    if (gc->parsed()) return cmd_gradcheck(grad_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
