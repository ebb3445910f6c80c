#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spsg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Single-channel image plane, indexed (row, col).
using Raster = Eigen::ArrayXXd;

}  // namespace spsg
