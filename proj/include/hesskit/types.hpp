#pragma once

#include <Eigen/Dense>

namespace hesskit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace hesskit
