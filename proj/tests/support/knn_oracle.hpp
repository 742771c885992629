#pragma once

// Brute-force kNN by full stable sort of every cosine row. Shares no code
// with the partial-sort selection in the library.

#include "simpgcn/graph.hpp"

#include <set>
#include <utility>

namespace oracle {

using EdgeSet = std::set<std::pair<simpgcn::NodeId, simpgcn::NodeId>>;

EdgeSet brute_force_knn(const simpgcn::Matrix& x, std::size_t k);
EdgeSet edge_set(const simpgcn::SparseGraph& g);

}  // namespace oracle
