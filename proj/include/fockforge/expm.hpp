#pragma once

#include <Eigen/Dense>

namespace fockforge {

/// Matrix exponential of a complex square matrix by Pade approximation
/// with scaling and squaring (Higham 2005 degree selection).
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

}  // namespace fockforge
