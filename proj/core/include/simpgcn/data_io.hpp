#pragma once

#include "simpgcn/feature_sim.hpp"
#include "simpgcn/graph.hpp"
#include "simpgcn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simpgcn {

struct Dataset {
  std::string name;
  SparseGraph graph;
  FeatureMatrix features;
  std::vector<Label> labels;
  std::size_t num_classes = 0;

  std::size_t num_nodes() const { return graph.num_nodes(); }

  /// Throws std::invalid_argument if sizes disagree or a label is outside [0, C).
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  /// True when read from split files rather than generated from a seed.
  bool canonical = false;

  /// Throws std::invalid_argument unless the sets are pairwise disjoint, in
  /// [0, n), free of duplicates, and train is nonempty.
  void validate(std::size_t num_nodes) const;

  friend bool operator==(const Split&, const Split&) = default;
};

/// Graph file: `n m`, then m lines `i j` with 0 <= i < j < n. Duplicate edges,
/// self-loops and out-of-range ids are rejected. Errors name file and line.
SparseGraph read_graph(const std::filesystem::path& path);
void write_graph(const std::filesystem::path& path, const SparseGraph& g);

/// Feature file: `n d`, then n lines of d reals.
FeatureMatrix read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureMatrix& x);

/// Label file: `n C`, then one class id per line.
std::vector<Label> read_labels(const std::filesystem::path& path, std::size_t* num_classes);
void write_labels(const std::filesystem::path& path, const std::vector<Label>& labels,
                  std::size_t num_classes);

/// One node id per line.
std::vector<NodeId> read_node_list(const std::filesystem::path& path);
void write_node_list(const std::filesystem::path& path, const std::vector<NodeId>& nodes);

/// Loads graph.txt, features.txt and labels.txt from `dir` and checks that the
/// three agree on n. The dataset is named after the directory.
Dataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const std::filesystem::path& dir, const Dataset& ds);

/// Reads train.txt, val.txt and test.txt from `dir` when all three exist.
std::optional<Split> load_split_files(const std::filesystem::path& dir, std::size_t num_nodes);
void write_split_files(const std::filesystem::path& dir, const Split& split);

/// `per_class` training nodes per class, then `num_val` and `num_test` nodes
/// drawn from the remaining pool. Deterministic in `seed`; every set is sorted.
/// Throws std::invalid_argument if a class has fewer than `per_class` nodes or
/// the pool is too small.
Split planetoid_split(const Dataset& ds, std::uint64_t seed, std::size_t per_class = 20,
                      std::size_t num_val = 500, std::size_t num_test = 1000);

/// Per-class stratified split. Each class of size c gets floor(c * val_frac)
/// validation and floor(c * test_frac) test nodes; the remainder trains.
/// Throws std::invalid_argument unless the fractions are non-negative and sum to 1.
Split random_split(const Dataset& ds, double train_frac, double val_frac, double test_frac,
                   std::uint64_t seed);

/// How each run of an experiment obtains its split.
///  - planetoid: split files in the dataset directory when present, otherwise
///    one seeded 20-per-class / 500 / 1000 split shared by every run.
///  - random: a fresh stratified 60/20/20 split per run, seeded by the run seed.
enum class SplitPolicy { planetoid, random };

std::string_view to_string(SplitPolicy p);
/// Accepts "planetoid" and "random". Throws std::invalid_argument.
SplitPolicy parse_split_policy(std::string_view name);

/// Environment variable naming the directory that holds one subdirectory per dataset.
inline constexpr const char* kDataRootEnv = "SIMPGCN_DATA_ROOT";

/// Resolves a dataset argument: an existing directory is used as is, otherwise
/// `$SIMPGCN_DATA_ROOT/<name>`. Returns nullopt when neither exists.
std::optional<std::filesystem::path> resolve_dataset(const std::string& name_or_path);

}  // namespace simpgcn
