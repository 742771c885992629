#pragma once

#include "simpgcn/data_io.hpp"

#include <cstdint>
#include <random>

namespace synthetic {

/// Erdos-Renyi graph G(n, p).
simpgcn::SparseGraph random_graph(std::size_t n, double p, std::uint64_t seed);

/// Uniform(-1, 1) dense matrix.
simpgcn::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Binary rows with exactly `ones` features set. Equal row norms make every
/// cosine a function of the overlap count alone, so ties are exact under any
/// summation order.
simpgcn::Matrix tied_binary_matrix(std::size_t rows, std::size_t cols, std::size_t ones,
                                   std::uint64_t seed);

struct BlockSpec {
  std::size_t per_class = 30;
  std::size_t classes = 3;
  std::size_t features = 40;
  double p_in = 0.1;    ///< edge probability within a class
  double p_out = 0.02;  ///< edge probability across classes
  double signal = 0.4;  ///< probability of a class-specific feature being on
  double noise = 0.05;  ///< probability of any other feature being on
};

/// Stochastic block model with binary bag-of-words features. Labels are
/// assigned round-robin so every class has exactly `per_class` nodes.
simpgcn::Dataset block_dataset(const BlockSpec& spec, std::uint64_t seed);

}  // namespace synthetic
