#include "simpgcn/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace simpgcn {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

ValueSummary summarize(std::string name, const Vector& v, double lo, double hi) {
  ValueSummary out;
  out.name = std::move(name);
  out.min = v.minCoeff();
  out.max = v.maxCoeff();
  out.lo = lo;
  out.hi = hi;
  const double width = (hi - lo) / 10.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<std::size_t>(std::clamp((v[i] - lo) / width, 0.0, 9.0));
    }
    ++out.counts[bin];
  }
  return out;
}

double mean_normalized_smoothness(const Matrix& signals, const SparseGraph& g,
                                  std::size_t* columns) {
  double total = 0.0;
  std::size_t used = 0;
  for (Eigen::Index c = 0; c < signals.cols(); ++c) {
    const Vector f = signals.col(c);
    const double energy = f.squaredNorm();
    if (energy == 0.0) continue;
    total += smoothness(f, g) / energy;
    ++used;
  }
  *columns = used;
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

}  // namespace

std::vector<TrainConfig> HyperGrid::expand(const TrainConfig& base) const {
  auto or_base = [](const auto& list, auto value) {
    using T = decltype(value);
    return list.empty() ? std::vector<T>{value} : std::vector<T>(list.begin(), list.end());
  };
  std::vector<TrainConfig> out;
  for (std::size_t h : or_base(hidden, base.hidden)) {
    for (double wd : or_base(weight_decay, base.weight_decay)) {
      for (double lam : or_base(lambda, base.lambda)) {
        for (double gam : or_base(gamma, base.gamma)) {
          for (double bs : or_base(score_bias_init, base.score_bias_init)) {
            TrainConfig c = base;
            c.hidden = h;
            c.weight_decay = wd;
            c.lambda = lam;
            c.gamma = gam;
            c.score_bias_init = bs;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

Preset preset_for(const std::string& dataset_name) {
  static const std::set<std::string> disassortative{"cornell", "texas", "wisconsin", "actor",
                                                    "film", "chameleon", "squirrel"};
  Preset p;
  if (disassortative.count(lower(dataset_name)) != 0) {
    p.family = "disassortative";
    p.config.learning_rate = 0.05;
    p.config.dropout = 0.5;
    p.config.epochs = 500;
    p.config.patience = 100;
    p.config.hidden = 32;
    p.config.weight_decay = 5e-4;
    p.config.lambda = 10.0;
    p.config.gamma = 0.1;
    p.config.score_bias_init = 0.0;
    p.split = SplitPolicy::random;
    p.grid.hidden = {16, 32, 48};
    p.grid.weight_decay = {5e-4, 5e-5};
    p.grid.lambda = {0.1, 1.0, 10.0};
    p.grid.gamma = {0.01, 0.1, 1.0};
  } else {
    p.family = "assortative";
    p.config.learning_rate = 0.01;
    p.config.dropout = 0.5;
    p.config.epochs = 200;
    p.config.hidden = 128;
    p.config.weight_decay = 5e-4;
    p.config.lambda = 5.0;
    p.config.gamma = 0.1;
    p.config.score_bias_init = 2.0;
    p.split = SplitPolicy::planetoid;
    p.grid.lambda = {0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0};
    p.grid.gamma = {0.01, 0.1};
    p.grid.score_bias_init = {0.0, 2.0};
  }
  p.config.k = 20;
  p.config.m = 5;
  return p;
}

Split split_for_run(const ExperimentData& data, SplitPolicy policy, std::uint64_t seed,
                    std::size_t run) {
  if (policy == SplitPolicy::planetoid) {
    if (!data.directory.empty()) {
      if (auto files = load_split_files(data.directory, data.dataset.num_nodes())) return *files;
    }
    return planetoid_split(data.dataset, seed);
  }
  return random_split(data.dataset, 0.6, 0.2, 0.2, seed + run);
}

std::vector<RunOutcome> run_many(const ExperimentData& data, const PreparedInputs& inputs,
                                 const TrainConfig& config, SplitPolicy policy, std::size_t runs) {
  if (runs == 0) throw std::invalid_argument("runs must be positive");
  std::vector<RunOutcome> out;
  out.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    const Split split = split_for_run(data, policy, config.seed, r);
    TrainConfig c = config;
    c.seed = config.seed + r;
    out.push_back({r, c.seed, split.canonical, train(data.dataset, inputs, split, c)});
  }
  return out;
}

void append_runs(Report& report, const std::vector<RunOutcome>& runs, const std::string& label) {
  std::vector<double> test;
  std::vector<double> val;
  std::vector<double> final_test;
  for (const RunOutcome& o : runs) {
    const TrainResult& r = o.result;
    report.add("run")
        .set("label", label)
        .set("run", static_cast<std::int64_t>(o.run))
        .set("seed", static_cast<std::int64_t>(o.seed))
        .set("split", std::string(o.canonical_split ? "canonical" : "generated"))
        .set("best_epoch", static_cast<std::int64_t>(r.history.best_epoch))
        .set("epochs_run", static_cast<std::int64_t>(r.history.epochs.size()))
        .set("val_acc", 100.0 * r.val_accuracy)
        .set("test_acc", 100.0 * r.test_accuracy)
        .set("final_test_acc", 100.0 * r.final_test_accuracy);
    test.push_back(100.0 * r.test_accuracy);
    val.push_back(100.0 * r.val_accuracy);
    final_test.push_back(100.0 * r.final_test_accuracy);
  }
  const MeanStd t = mean_std(test);
  const MeanStd v = mean_std(val);
  const MeanStd f = mean_std(final_test);
  report.add("summary")
      .set("label", label)
      .set("runs", static_cast<std::int64_t>(runs.size()))
      .set("test_acc_mean", t.mean)
      .set("test_acc_std", t.std)
      .set("val_acc_mean", v.mean)
      .set("val_acc_std", v.std)
      .set("final_test_acc_mean", f.mean)
      .set("final_test_acc_std", f.std);
}

GridResult grid_search(const ExperimentData& data, const PreparedInputs& inputs,
                       const TrainConfig& base, const HyperGrid& grid, SplitPolicy policy,
                       std::size_t runs) {
  GridResult out;
  for (const TrainConfig& c : grid.expand(base)) {
    std::vector<double> val;
    for (const RunOutcome& o : run_many(data, inputs, c, policy, runs)) {
      val.push_back(o.result.val_accuracy);
    }
    const double score = mean_std(val).mean;
    out.scored.emplace_back(c, score);
    if (score > out.best_val) {
      out.best_val = score;
      out.best = c;
    }
  }
  return out;
}

OverlapResult analyze_overlap(const Dataset& ds, const PreparedInputs& inputs,
                              const ModelParams& params, ModelVariant variant, std::size_t k) {
  const SparseGraph a_f = build_knn_graph(ds.features, k);
  const Matrix logits = predict(ds, inputs, params, variant);
  const SparseGraph a_h = build_knn_graph(FeatureMatrix(logits), k);
  OverlapResult r;
  r.k = k;
  r.features_hidden = overlap(a_f, a_h);
  r.hidden_structure = overlap(a_h, ds.graph);
  r.features_structure = overlap(a_f, ds.graph);
  return r;
}

std::vector<ValueSummary> inspect_scores(const Dataset& ds, const PreparedInputs& inputs,
                                         const Checkpoint& ckpt) {
  if (ckpt.config.variant != ModelVariant::simp) {
    throw std::invalid_argument("checkpoint holds a '" + std::string(to_string(ckpt.config.variant)) +
                                "' model; score inspection needs a simp model");
  }
  const GraphOperators ops = GraphOperators::build(ds.graph, inputs.feature_graph);
  const ForwardTrace t = forward(inputs.features, ops, ckpt.params, Propagation::adaptive);
  std::vector<ValueSummary> out;
  const double gamma = ckpt.params.gamma;
  for (std::size_t l = 0; l < 2; ++l) {
    const std::string idx = std::to_string(l + 1);
    out.push_back(summarize("s" + idx, t.layers[l].score, 0.0, 1.0));
  }
  for (std::size_t l = 0; l < 2; ++l) {
    const Vector scaled = gamma * t.layers[l].loops;
    out.push_back(summarize("gammaK" + std::to_string(l + 1), scaled, scaled.minCoeff(),
                            scaled.maxCoeff()));
  }
  return out;
}

std::vector<AblationRow> ablation(const ExperimentData& data, const PreparedInputs& inputs,
                                  const TrainConfig& base, SplitPolicy policy, std::size_t runs) {
  struct Spec {
    const char* name;
    bool ssl;
    bool loops;
    ModelVariant variant;
  };
  const Spec specs[] = {
      {"ssl+A+Af+DK", true, true, ModelVariant::simp},
      {"ssl+A+Af", true, false, ModelVariant::simp},
      {"no-ssl+A+Af+DK", false, true, ModelVariant::simp},
      {"no-ssl+A+Af", false, false, ModelVariant::simp},
      {"gcn", false, false, ModelVariant::gcn},
  };
  std::vector<AblationRow> rows;
  for (const Spec& s : specs) {
    AblationRow row;
    row.name = s.name;
    row.config = base;
    row.config.variant = s.variant;
    if (!s.ssl) row.config.lambda = 0.0;
    if (!s.loops) row.config.gamma = 0.0;
    row.runs = run_many(data, inputs, row.config, policy, runs);
    std::vector<double> test;
    for (const RunOutcome& o : row.runs) test.push_back(100.0 * o.result.test_accuracy);
    row.test = mean_std(test);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SmoothnessRow> smoothness_profile(const Dataset& ds, const Matrix* logits) {
  const NormalizedPropagator p = normalize_with_selfloops(ds.graph);
  const Matrix x = ds.features.values();
  const Matrix px = p * x;
  const Matrix ppx = p * px;
  std::vector<SmoothnessRow> rows;
  auto add = [&](const char* name, const Matrix& m) {
    SmoothnessRow r;
    r.signal = name;
    r.mean_normalized = mean_normalized_smoothness(m, ds.graph, &r.columns);
    rows.push_back(r);
  };
  add("X", x);
  add("PX", px);
  add("PPX", ppx);
  if (logits != nullptr) add("logits", *logits);
  return rows;
}

SparseGraph perturb_random(const SparseGraph& g, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("perturbation fraction must lie in [0, 1]");
  }
  const std::size_t n = g.num_nodes();
  std::vector<Edge> edges = g.edges();
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(edges.size())));
  const std::size_t max_edges = n * (n - 1) / 2;
  if (edges.size() + count > max_edges) {
    throw std::invalid_argument("graph too dense to add random edges");
  }
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::size_t bound) {
    return std::min(bound - 1, static_cast<std::size_t>(detail::unit_uniform(rng) *
                                                        static_cast<double>(bound)));
  };
  // Partial Fisher-Yates picks the edges to drop.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + draw(edges.size() - i);
    std::swap(edges[i], edges[j]);
  }
  std::set<std::pair<NodeId, NodeId>> present;
  for (const Edge& e : edges) present.insert({e.u, e.v});
  std::vector<Edge> kept(edges.begin() + static_cast<std::ptrdiff_t>(count), edges.end());
  std::size_t added = 0;
  while (added < count) {
    auto u = static_cast<NodeId>(draw(n));
    auto v = static_cast<NodeId>(draw(n));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    // Dropped edges are not re-added, so the result differs in 2 * count slots.
    if (!present.insert({u, v}).second) continue;
    kept.push_back({u, v, 1.0});
    ++added;
  }
  return SparseGraph::from_edges(n, kept);
}

}  // namespace simpgcn
