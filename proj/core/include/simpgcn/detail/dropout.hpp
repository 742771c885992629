#pragma once

// Implementation of simpgcn::sample_dropout; included from model.hpp.

#include <stdexcept>

namespace simpgcn {

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
template <typename Rng>
double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

template <typename Rng>
DropoutMasks sample_dropout(Eigen::Index input_nnz, Eigen::Index num_nodes,
                            Eigen::Index hidden_dim, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  DropoutMasks masks;
  masks.input.resize(input_nnz);
  for (Eigen::Index k = 0; k < input_nnz; ++k) {
    masks.input[k] = detail::unit_uniform(rng) < rate ? 0.0 : keep_scale;
  }
  masks.hidden.resize(num_nodes, hidden_dim);
  // Row-major fill order keeps the draw sequence independent of storage order.
  for (Eigen::Index i = 0; i < num_nodes; ++i) {
    for (Eigen::Index c = 0; c < hidden_dim; ++c) {
      masks.hidden(i, c) = detail::unit_uniform(rng) < rate ? 0.0 : keep_scale;
    }
  }
  return masks;
}

}  // namespace simpgcn
