#pragma once

#include <Eigen/Dense>

namespace sgap {

// Node-major storage: one row per node, so row batches are contiguous.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = RowMatrix<double>;
using VectorXd = Vector<double>;

}  // namespace sgap
