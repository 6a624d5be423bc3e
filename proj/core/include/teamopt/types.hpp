#pragma once

#include <limits>

#include <Eigen/Dense>

namespace teamopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace teamopt
