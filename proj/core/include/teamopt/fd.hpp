#pragma once

#include <algorithm>
#include <cmath>

#include "teamopt/types.hpp"

namespace teamopt {

/// Central-difference step for a coordinate of magnitude |value|.
inline double fd_step(double value) { return std::max(1e-6, 1e-6 * std::abs(value)); }

/// Central-difference gradient of a scalar function.
template <class F>
Vector fd_gradient(F&& fn, const Vector& at) {
  Vector grad(at.size());
  Vector probe = at;
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double h = fd_step(at[j]);
    probe[j] = at[j] + h;
    const double up = fn(probe);
    probe[j] = at[j] - h;
    const double down = fn(probe);
    probe[j] = at[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Central-difference Jacobian of a vector function; column j is d fn / d at_j.
template <class F>
Matrix fd_jacobian(F&& fn, const Vector& at, int rows) {
  Matrix jac(rows, at.size());
  Vector probe = at;
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double h = fd_step(at[j]);
    probe[j] = at[j] + h;
    const Vector up = fn(probe);
    probe[j] = at[j] - h;
    const Vector down = fn(probe);
    probe[j] = at[j];
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

}  // namespace teamopt
