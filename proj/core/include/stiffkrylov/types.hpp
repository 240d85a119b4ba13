#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stiffkrylov {

using Real = double;
using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

}  // namespace stiffkrylov
