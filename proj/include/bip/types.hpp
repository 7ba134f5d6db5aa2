#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace bip {

using Index = Eigen::Index;

// Embeddings are stored row-major in single precision; all similarity
// arithmetic accumulates in double.
template <class Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RowMatrixXf = RowMatrix<float>;
using RowMatrixXd = RowMatrix<double>;
using VectorXd = Eigen::VectorXd;
using VectorXf = Eigen::VectorXf;

// Global worker count for the parallel kernels. Results are required to be
// independent of this value; it only controls the thread pool width.
void set_num_threads(int n);
int num_threads();

}  // namespace bip
