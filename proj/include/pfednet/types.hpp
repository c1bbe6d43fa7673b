#pragma once

#include <Eigen/Dense>

namespace pfednet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace pfednet
