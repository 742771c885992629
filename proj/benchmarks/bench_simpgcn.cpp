#include "simpgcn/diff_engine.hpp"
#include "simpgcn/feature_sim.hpp"
#include "simpgcn/graph.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace simpgcn;

// Sparse binary bag-of-words features, roughly 2% dense.
FeatureMatrix bag_of_words(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(0.02);
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, static_cast<Eigen::Index>(rng() % d)) = 1.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (on(rng)) x(i, j) = 1.0;
    }
  }
  return FeatureMatrix(x);
}

// Random graph with about `avg_degree` neighbors per node.
SparseGraph sparse_graph(std::size_t n, double avg_degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
  const auto target = static_cast<std::size_t>(avg_degree * static_cast<double>(n) / 2.0);
  while (edges.size() < target) {
    const auto u = static_cast<NodeId>(rng() % n);
    const auto v = static_cast<NodeId>(rng() % n);
    if (u == v || seen[u][v]) continue;
    seen[u][v] = seen[v][u] = true;
    edges.push_back({std::min(u, v), std::max(u, v)});
  }
  return SparseGraph::from_edges(n, edges);
}

void BM_CosineSimilarity(benchmark::State& state) {
  const FeatureMatrix x = bag_of_words(static_cast<std::size_t>(state.range(0)), 500, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(x));
}
BENCHMARK(BM_CosineSimilarity)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_KnnGraph(benchmark::State& state) {
  const FeatureMatrix x = bag_of_words(static_cast<std::size_t>(state.range(0)), 500, 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_knn_graph(x, 20));
}
BENCHMARK(BM_KnnGraph)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SamplePairs(benchmark::State& state) {
  const FeatureMatrix x = bag_of_words(static_cast<std::size_t>(state.range(0)), 500, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_pairs(x, 5, 0));
}
BENCHMARK(BM_SamplePairs)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Propagate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const NormalizedPropagator p = normalize_with_selfloops(sparse_graph(n, 4.0, 4));
  const Matrix h = Matrix::Random(static_cast<Eigen::Index>(n), 64);
  for (auto _ : state) {
    Matrix out = p * h;
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Propagate)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

struct TrainingFixture {
  TrainingProblem problem;
  ModelParams params;

  explicit TrainingFixture(std::size_t n) {
    const FeatureMatrix x = bag_of_words(n, 500, 5);
    const SparseGraph g = sparse_graph(n, 4.0, 6);
    problem.features = x.row_normalized().values().sparseView();
    problem.operators = GraphOperators::build(g, build_knn_graph(x, 20));
    problem.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) problem.labels[i] = static_cast<Label>(i % 7);
    for (std::size_t i = 0; i < 140 && i < n; ++i) problem.train_nodes.push_back(static_cast<NodeId>(i));
    problem.pairs = sample_pairs(x, 5, 0);
    problem.propagation = Propagation::adaptive;
    problem.weight_decay = 5e-4;
    params = init_params(500, 128, 7, 0.1, 5.0, 2.0, 0);
  }
};

void BM_Forward(benchmark::State& state) {
  const TrainingFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        forward(f.problem.features, f.problem.operators, f.params, f.problem.propagation));
  }
}
BENCHMARK(BM_Forward)->Arg(1000)->Arg(2708)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const TrainingFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const ForwardTrace t =
        forward(f.problem.features, f.problem.operators, f.params, f.problem.propagation);
    benchmark::DoNotOptimize(backward(t, f.problem, f.params));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(1000)->Arg(2708)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
