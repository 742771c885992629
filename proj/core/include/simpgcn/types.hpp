#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace simpgcn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Row-major compressed sparse matrix; column indices are sorted within each row.
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

using NodeId = std::int32_t;

/// Shape or size disagreement between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or record.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace simpgcn
