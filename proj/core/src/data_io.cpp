#include "simpgcn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <system_error>

namespace simpgcn {

namespace fs = std::filesystem;

namespace {

/// Line-oriented reader that reports file:line in every error.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw FormatError("cannot open " + path.string());
  }

  /// Next non-blank line, or false at end of file.
  bool next() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.find_first_not_of(" \t") != std::string::npos) {
        pos_ = 0;
        return true;
      }
    }
    return false;
  }

  void require_next(const std::string& what) {
    if (!next()) fail_at(line_no_ + 1, "unexpected end of file, expected " + what);
  }

  template <typename T>
  T field(const char* what) {
    skip_space();
    if (pos_ >= line_.size()) fail("missing " + std::string(what));
    const char* first = line_.data() + pos_;
    const char* last = line_.data() + line_.size();
    T value{};
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || (ptr != last && *ptr != ' ' && *ptr != '\t')) {
      fail("invalid " + std::string(what) + " '" + token(first, last) + "'");
    }
    pos_ = static_cast<std::size_t>(ptr - line_.data());
    return value;
  }

  void expect_end() {
    skip_space();
    if (pos_ != line_.size()) fail("unexpected trailing content");
  }

  bool has_more_lines() { return next(); }
  std::size_t line_number() const { return line_no_; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(line_no_, msg); }
  [[noreturn]] void fail_at(std::size_t line, const std::string& msg) const {
    throw FormatError(path_.string() + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }
  static std::string token(const char* first, const char* last) {
    const char* end = std::find_if(first, last, [](char c) { return c == ' ' || c == '\t'; });
    return std::string(first, end);
  }

  fs::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::size_t pos_ = 0;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Shortest decimal form that parses back to the same double.
std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::size_t positive_count(LineReader& r, const char* what) {
  const auto v = r.field<long long>(what);
  if (v < 1) r.fail(std::string(what) + " must be positive");
  return static_cast<std::size_t>(v);
}

void check_set(const std::vector<NodeId>& nodes, std::size_t n, std::vector<char>& seen,
               const char* name) {
  for (NodeId v : nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) {
      throw std::invalid_argument(std::string(name) + " node " + std::to_string(v) +
                                  " out of range");
    }
    if (seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("node " + std::to_string(v) + " appears twice across splits");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

std::vector<std::vector<NodeId>> nodes_by_class(const Dataset& ds) {
  std::vector<std::vector<NodeId>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(static_cast<NodeId>(i));
  }
  return by_class;
}

template <typename Rng>
void shuffle(std::vector<NodeId>& v, Rng& rng) {
  // Fisher-Yates with our own index draw so the order is identical across
  // standard library implementations.
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(detail::unit_uniform(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = graph.num_nodes();
  if (features.num_nodes() != n || labels.size() != n) {
    throw std::invalid_argument("dataset '" + name + "': graph has " + std::to_string(n) +
                                " nodes, features " + std::to_string(features.num_nodes()) +
                                ", labels " + std::to_string(labels.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw std::invalid_argument("dataset '" + name + "': label " + std::to_string(labels[i]) +
                                  " of node " + std::to_string(i) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
  }
}

void Split::validate(std::size_t num_nodes) const {
  if (train.empty()) throw std::invalid_argument("split has an empty training set");
  std::vector<char> seen(num_nodes, 0);
  check_set(train, num_nodes, seen, "train");
  check_set(val, num_nodes, seen, "val");
  check_set(test, num_nodes, seen, "test");
}

SparseGraph read_graph(const fs::path& path) {
  LineReader r(path);
  r.require_next("header 'n m'");
  const std::size_t n = positive_count(r, "node count");
  const auto m = r.field<long long>("edge count");
  if (m < 0) r.fail("edge count must be non-negative");
  r.expect_end();

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  std::vector<std::size_t> line_of;
  line_of.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    r.require_next("edge " + std::to_string(e + 1) + " of " + std::to_string(m));
    const auto i = r.field<long long>("node id");
    const auto j = r.field<long long>("node id");
    r.expect_end();
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
      r.fail("node id out of range [0, " + std::to_string(n) + ")");
    }
    if (i >= j) r.fail("edge must satisfy i < j");
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), 1.0});
    line_of.push_back(r.line_number());
  }
  if (r.has_more_lines()) r.fail("more edge lines than declared in the header");
  // Duplicates are reported by line before the graph constructor sees them.
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return edges[a].u != edges[b].u ? edges[a].u < edges[b].u
           : edges[a].v != edges[b].v ? edges[a].v < edges[b].v
                                      : a < b;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Edge& a = edges[order[k - 1]];
    const Edge& b = edges[order[k]];
    if (a.u == b.u && a.v == b.v) {
      r.fail_at(line_of[order[k]], "duplicate edge (" + std::to_string(b.u) + ", " +
                                  std::to_string(b.v) + ")");
    }
  }
  return SparseGraph::from_edges(n, edges);
}

void write_graph(const fs::path& path, const SparseGraph& g) {
  const std::vector<Edge> edges = g.edges();
  for (const Edge& e : edges) {
    if (e.u == e.v || e.weight != 1.0) {
      throw std::invalid_argument("graph files hold unweighted graphs without self-loops");
    }
  }
  auto out = open_out(path);
  out << g.num_nodes() << ' ' << edges.size() << '\n';
  for (const Edge& e : edges) out << e.u << ' ' << e.v << '\n';
  finish(out, path);
}

FeatureMatrix read_features(const fs::path& path) {
  LineReader r(path);
  r.require_next("header 'n d'");
  const std::size_t n = positive_count(r, "row count");
  const std::size_t d = positive_count(r, "column count");
  r.expect_end();
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    r.require_next("feature row " + std::to_string(i + 1) + " of " + std::to_string(n));
    for (std::size_t c = 0; c < d; ++c) {
      const double v = r.field<double>("feature value");
      if (!std::isfinite(v)) r.fail("non-finite feature value");
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
    r.expect_end();
  }
  if (r.has_more_lines()) r.fail("more feature rows than declared in the header");
  return FeatureMatrix(std::move(x));
}

void write_features(const fs::path& path, const FeatureMatrix& x) {
  auto out = open_out(path);
  const Matrix& v = x.values();
  out << v.rows() << ' ' << v.cols() << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    line.clear();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (c > 0) line += ' ';
      line += format_real(v(i, c));
    }
    out << line << '\n';
  }
  finish(out, path);
}

std::vector<Label> read_labels(const fs::path& path, std::size_t* num_classes) {
  LineReader r(path);
  r.require_next("header 'n C'");
  const std::size_t n = positive_count(r, "node count");
  const std::size_t c = positive_count(r, "class count");
  r.expect_end();
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.require_next("label " + std::to_string(i + 1) + " of " + std::to_string(n));
    const auto y = r.field<long long>("label");
    r.expect_end();
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      r.fail("label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
    }
    labels[i] = static_cast<Label>(y);
  }
  if (r.has_more_lines()) r.fail("more labels than declared in the header");
  if (num_classes != nullptr) *num_classes = c;
  return labels;
}

void write_labels(const fs::path& path, const std::vector<Label>& labels,
                  std::size_t num_classes) {
  auto out = open_out(path);
  out << labels.size() << ' ' << num_classes << '\n';
  for (Label y : labels) out << y << '\n';
  finish(out, path);
}

std::vector<NodeId> read_node_list(const fs::path& path) {
  LineReader r(path);
  std::vector<NodeId> nodes;
  while (r.next()) {
    const auto v = r.field<long long>("node id");
    r.expect_end();
    if (v < 0 || v > std::numeric_limits<NodeId>::max()) r.fail("node id out of range");
    nodes.push_back(static_cast<NodeId>(v));
  }
  return nodes;
}

void write_node_list(const fs::path& path, const std::vector<NodeId>& nodes) {
  auto out = open_out(path);
  for (NodeId v : nodes) out << v << '\n';
  finish(out, path);
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("dataset directory not found: " + dir.string());
  Dataset ds;
  ds.name = fs::path(dir).lexically_normal().filename().string();
  if (ds.name.empty()) ds.name = fs::path(dir).lexically_normal().parent_path().filename().string();
  ds.graph = read_graph(dir / "graph.txt");
  ds.features = read_features(dir / "features.txt");
  ds.labels = read_labels(dir / "labels.txt", &ds.num_classes);
  const std::size_t n = ds.graph.num_nodes();
  if (ds.features.num_nodes() != n) {
    throw FormatError((dir / "features.txt").string() + ":1: declares " +
                      std::to_string(ds.features.num_nodes()) + " rows but graph.txt has " +
                      std::to_string(n) + " nodes");
  }
  if (ds.labels.size() != n) {
    throw FormatError((dir / "labels.txt").string() + ":1: declares " +
                      std::to_string(ds.labels.size()) + " labels but graph.txt has " +
                      std::to_string(n) + " nodes");
  }
  return ds;
}

void write_dataset(const fs::path& dir, const Dataset& ds) {
  ds.validate();
  fs::create_directories(dir);
  write_graph(dir / "graph.txt", ds.graph);
  write_features(dir / "features.txt", ds.features);
  write_labels(dir / "labels.txt", ds.labels, ds.num_classes);
}

std::optional<Split> load_split_files(const fs::path& dir, std::size_t num_nodes) {
  const fs::path train = dir / "train.txt";
  const fs::path val = dir / "val.txt";
  const fs::path test = dir / "test.txt";
  if (!fs::exists(train) || !fs::exists(val) || !fs::exists(test)) return std::nullopt;
  Split s;
  s.train = read_node_list(train);
  s.val = read_node_list(val);
  s.test = read_node_list(test);
  s.canonical = true;
  s.validate(num_nodes);
  return s;
}

void write_split_files(const fs::path& dir, const Split& split) {
  fs::create_directories(dir);
  write_node_list(dir / "train.txt", split.train);
  write_node_list(dir / "val.txt", split.val);
  write_node_list(dir / "test.txt", split.test);
}

Split planetoid_split(const Dataset& ds, std::uint64_t seed, std::size_t per_class,
                      std::size_t num_val, std::size_t num_test) {
  ds.validate();
  std::mt19937_64 rng(seed);
  auto by_class = nodes_by_class(ds);
  Split s;
  std::vector<NodeId> pool;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < per_class) {
      throw std::invalid_argument("class " + std::to_string(c) + " has " +
                                  std::to_string(members.size()) + " nodes, fewer than " +
                                  std::to_string(per_class));
    }
    shuffle(members, rng);
    s.train.insert(s.train.end(), members.begin(),
                   members.begin() + static_cast<std::ptrdiff_t>(per_class));
    pool.insert(pool.end(), members.begin() + static_cast<std::ptrdiff_t>(per_class),
                members.end());
  }
  std::sort(pool.begin(), pool.end());
  if (pool.size() < num_val + num_test) {
    throw std::invalid_argument("only " + std::to_string(pool.size()) +
                                " nodes remain for validation and test, need " +
                                std::to_string(num_val + num_test));
  }
  shuffle(pool, rng);
  s.val.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(num_val));
  s.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(num_val),
                pool.begin() + static_cast<std::ptrdiff_t>(num_val + num_test));
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split random_split(const Dataset& ds, double train_frac, double val_frac, double test_frac,
                   std::uint64_t seed) {
  ds.validate();
  if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0 ||
      std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  }
  std::mt19937_64 rng(seed);
  auto by_class = nodes_by_class(ds);
  Split s;
  for (auto& members : by_class) {
    shuffle(members, rng);
    const auto c = static_cast<double>(members.size());
    // The small slack keeps exact products such as 10 * 0.2 from flooring down.
    const auto n_val = static_cast<std::size_t>(std::floor(c * val_frac + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(c * test_frac + 1e-9));
    const auto first_test = static_cast<std::ptrdiff_t>(n_val);
    const auto first_train = static_cast<std::ptrdiff_t>(n_val + n_test);
    s.val.insert(s.val.end(), members.begin(), members.begin() + first_test);
    s.test.insert(s.test.end(), members.begin() + first_test, members.begin() + first_train);
    s.train.insert(s.train.end(), members.begin() + first_train, members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::string_view to_string(SplitPolicy p) {
  return p == SplitPolicy::planetoid ? "planetoid" : "random";
}

SplitPolicy parse_split_policy(std::string_view name) {
  if (name == "planetoid") return SplitPolicy::planetoid;
  if (name == "random") return SplitPolicy::random;
  throw std::invalid_argument("unknown split policy '" + std::string(name) +
                              "' (expected planetoid or random)");
}

std::optional<fs::path> resolve_dataset(const std::string& name_or_path) {
  if (fs::is_directory(name_or_path)) return fs::path(name_or_path);
  if (const char* root = std::getenv(kDataRootEnv); root != nullptr && *root != '\0') {
    const fs::path candidate = fs::path(root) / name_or_path;
    if (fs::is_directory(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace simpgcn
