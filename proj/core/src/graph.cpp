#include "simpgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace simpgcn {

namespace {

void check_node(NodeId id, std::size_t n) {
  if (id < 0 || static_cast<std::size_t>(id) >= n) {
    throw std::invalid_argument("node id " + std::to_string(id) + " out of range [0, " +
                                std::to_string(n) + ")");
  }
}

std::vector<double> selfloop_degrees(const SparseGraph& g) {
  std::vector<double> deg(g.num_nodes());
  for (std::size_t i = 0; i < deg.size(); ++i) {
    deg[i] = 1.0 + g.degree(static_cast<NodeId>(i));
  }
  return deg;
}

}  // namespace

SparseGraph SparseGraph::from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                                    bool allow_self_loops) {
  struct Slot {
    NodeId row;
    NodeId col;
    double weight;
  };
  std::vector<Slot> slots;
  slots.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    check_node(e.u, num_nodes);
    check_node(e.v, num_nodes);
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw std::invalid_argument("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                  ") has non-positive or non-finite weight");
    }
    if (e.u == e.v) {
      if (!allow_self_loops) {
        throw std::invalid_argument("self-loop on node " + std::to_string(e.u));
      }
      slots.push_back({e.u, e.u, e.weight});
    } else {
      slots.push_back({e.u, e.v, e.weight});
      slots.push_back({e.v, e.u, e.weight});
    }
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < slots.size(); ++k) {
    if (slots[k].row == slots[k - 1].row && slots[k].col == slots[k - 1].col) {
      const NodeId lo = std::min(slots[k].row, slots[k].col);
      const NodeId hi = std::max(slots[k].row, slots[k].col);
      throw std::invalid_argument("duplicate edge (" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + ")");
    }
  }

  SparseGraph g;
  g.row_offsets_.assign(num_nodes + 1, 0);
  g.columns_.reserve(slots.size());
  g.weights_.reserve(slots.size());
  for (const Slot& s : slots) {
    ++g.row_offsets_[static_cast<std::size_t>(s.row) + 1];
    g.columns_.push_back(s.col);
    g.weights_.push_back(s.weight);
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    g.row_offsets_[i + 1] += g.row_offsets_[i];
  }
  g.num_edges_ = edges.size();
  return g;
}

std::span<const NodeId> SparseGraph::neighbor_ids(NodeId i) const {
  const auto row = static_cast<std::size_t>(i);
  return {columns_.data() + row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]};
}

std::span<const double> SparseGraph::neighbor_weights(NodeId i) const {
  const auto row = static_cast<std::size_t>(i);
  return {weights_.data() + row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]};
}

double SparseGraph::degree(NodeId i) const {
  double d = 0.0;
  for (double w : neighbor_weights(i)) d += w;
  return d;
}

bool SparseGraph::has_edge(NodeId i, NodeId j) const {
  const auto ids = neighbor_ids(i);
  return std::binary_search(ids.begin(), ids.end(), j);
}

double SparseGraph::weight(NodeId i, NodeId j) const {
  const auto ids = neighbor_ids(i);
  const auto it = std::lower_bound(ids.begin(), ids.end(), j);
  if (it == ids.end() || *it != j) return 0.0;
  return neighbor_weights(i)[static_cast<std::size_t>(it - ids.begin())];
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    const auto row = static_cast<NodeId>(i);
    const auto ids = neighbor_ids(row);
    const auto ws = neighbor_weights(row);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] >= row) out.push_back({row, ids[k], ws[k]});
    }
  }
  return out;
}

Matrix SparseGraph::to_dense() const {
  const auto n = static_cast<Eigen::Index>(num_nodes());
  Matrix dense = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ids = neighbor_ids(static_cast<NodeId>(i));
    const auto ws = neighbor_weights(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < ids.size(); ++k) dense(i, ids[k]) = ws[k];
  }
  return dense;
}

NormalizedPropagator normalize_with_selfloops(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  const std::vector<double> deg = selfloop_degrees(g);
  NormalizedPropagator p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXi row_sizes(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    row_sizes[static_cast<Eigen::Index>(i)] =
        static_cast<int>(g.neighbor_ids(static_cast<NodeId>(i)).size()) + 1;
  }
  p.reserve(row_sizes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<NodeId>(i);
    const auto ids = g.neighbor_ids(row);
    const auto ws = g.neighbor_weights(row);
    bool diagonal_done = false;
    for (std::size_t k = 0; k <= ids.size(); ++k) {
      // Merge the identity entry into the sorted row.
      if (!diagonal_done && (k == ids.size() || ids[k] >= row)) {
        double a = 1.0;
        if (k < ids.size() && ids[k] == row) a += ws[k++];
        p.insert(row, row) = a / deg[i];
        diagonal_done = true;
      }
      if (k < ids.size()) {
        const auto j = static_cast<std::size_t>(ids[k]);
        p.insert(row, ids[k]) = ws[k] / std::sqrt(deg[i] * deg[j]);
      }
    }
  }
  p.makeCompressed();
  return p;
}

NormalizedPropagator normalize_plain(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = g.degree(static_cast<NodeId>(i));
  NormalizedPropagator p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(g.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<NodeId>(i);
    const auto ids = g.neighbor_ids(row);
    const auto ws = g.neighbor_weights(row);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto j = static_cast<std::size_t>(ids[k]);
      entries.emplace_back(row, ids[k], ws[k] / std::sqrt(deg[i] * deg[j]));
    }
  }
  p.setFromTriplets(entries.begin(), entries.end());
  p.makeCompressed();
  return p;
}

double smoothness(const GraphSignal& f, const SparseGraph& g) {
  if (static_cast<std::size_t>(f.size()) != g.num_nodes()) {
    throw DimensionError("smoothness: signal length " + std::to_string(f.size()) +
                         " does not match node count " + std::to_string(g.num_nodes()));
  }
  const std::vector<double> deg = selfloop_degrees(g);
  double total = 0.0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto row = static_cast<NodeId>(i);
    const double fi = f[static_cast<Eigen::Index>(i)] / std::sqrt(deg[i]);
    const auto ids = g.neighbor_ids(row);
    const auto ws = g.neighbor_weights(row);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto j = static_cast<std::size_t>(ids[k]);
      const double diff = fi - f[ids[k]] / std::sqrt(deg[j]);
      total += ws[k] * diff * diff;
    }
    // The identity part of A~ contributes (f_i/sqrt - f_i/sqrt)^2 = 0.
  }
  return 0.5 * total;
}

GraphSignal signal_recovery_step(const GraphSignal& f0, const SparseGraph& g, double c) {
  if (static_cast<std::size_t>(f0.size()) != g.num_nodes()) {
    throw DimensionError("signal_recovery_step: signal length " + std::to_string(f0.size()) +
                         " does not match node count " + std::to_string(g.num_nodes()));
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("signal_recovery_step: c must be finite and non-negative");
  }
  const NormalizedPropagator p = normalize_with_selfloops(g);
  const GraphSignal laplacian_f = f0 - p * f0;
  // f0 - grad g(f0), where grad g(f0) = 2 (f0 - f0) + 2c L f0.
  return f0 - 2.0 * c * laplacian_f;
}

std::size_t overlap_count(const SparseGraph& a1, const SparseGraph& a2) {
  if (a1.num_nodes() != a2.num_nodes()) {
    throw DimensionError("overlap: node counts differ (" + std::to_string(a1.num_nodes()) +
                         " vs " + std::to_string(a2.num_nodes()) + ")");
  }
  std::size_t shared = 0;
  for (std::size_t i = 0; i < a1.num_nodes(); ++i) {
    const auto row = static_cast<NodeId>(i);
    const auto x = a1.neighbor_ids(row);
    const auto y = a2.neighbor_ids(row);
    std::size_t p = 0;
    std::size_t q = 0;
    while (p < x.size() && q < y.size()) {
      if (x[p] < y[q]) {
        ++p;
      } else if (y[q] < x[p]) {
        ++q;
      } else {
        ++shared;
        ++p;
        ++q;
      }
    }
  }
  return shared;
}

double overlap(const SparseGraph& a1, const SparseGraph& a2) {
  if (a1.nnz() == 0) throw std::invalid_argument("overlap: first graph has no edges");
  const std::size_t shared = overlap_count(a1, a2);
  return static_cast<double>(shared) / static_cast<double>(a1.nnz());
}

SparseGraph add_graphs(const SparseGraph& a1, const SparseGraph& a2) {
  if (a1.num_nodes() != a2.num_nodes()) {
    throw DimensionError("add_graphs: node counts differ");
  }
  std::vector<Edge> merged = a1.edges();
  const std::vector<Edge> second = a2.edges();
  std::vector<Edge> out;
  out.reserve(merged.size() + second.size());
  auto less = [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; };
  std::size_t p = 0;
  std::size_t q = 0;
  while (p < merged.size() || q < second.size()) {
    if (q == second.size() || (p < merged.size() && less(merged[p], second[q]))) {
      out.push_back(merged[p++]);
    } else if (p == merged.size() || less(second[q], merged[p])) {
      out.push_back(second[q++]);
    } else {
      out.push_back({merged[p].u, merged[p].v, merged[p].weight + second[q].weight});
      ++p;
      ++q;
    }
  }
  const bool loops = std::any_of(out.begin(), out.end(), [](const Edge& e) { return e.u == e.v; });
  return SparseGraph::from_edges(a1.num_nodes(), out, loops);
}

}  // namespace simpgcn
