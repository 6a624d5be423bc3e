#include "teamopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "teamopt/errors.hpp"

namespace teamopt {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw StructuralError("time grid: horizon must be positive and finite, got " +
                          std::to_string(horizon));
  }
  if (steps < 1) {
    throw StructuralError("time grid: steps must be >= 1, got " + std::to_string(steps));
  }
}

TimeGrid TimeGrid::with_default_resolution(double horizon) {
  const int steps = std::max(1, static_cast<int>(std::ceil(kDefaultStepsPerUnit * horizon)));
  return {horizon, steps};
}

double TimeGrid::node(int k) const {
  if (k == steps_) return horizon_;
  return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(size()));
  for (int k = 0; k <= steps_; ++k) out[static_cast<std::size_t>(k)] = node(k);
  return out;
}

Vector TimeGrid::trapezoid_weights() const {
  Vector w = Vector::Constant(size(), step());
  w[0] *= 0.5;
  w[steps_] *= 0.5;
  return w;
}

Trajectory::Trajectory(std::vector<double> times, Matrix values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(times_.size()) != values_.rows()) {
    throw StructuralError("trajectory: " + std::to_string(times_.size()) + " times but " +
                          std::to_string(values_.rows()) + " samples");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw StructuralError("trajectory: times not strictly increasing at sample " +
                            std::to_string(k));
    }
  }
}

Trajectory::Trajectory(const TimeGrid& grid, int dim)
    : times_(grid.nodes()), values_(Matrix::Zero(grid.size(), dim)) {}

Vector Trajectory::at(double t) const {
  if (times_.empty()) throw StructuralError("trajectory: interpolation on an empty path");
  if (t <= times_.front()) return (*this)[0];
  if (t >= times_.back()) return (*this)[size() - 1];
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const int hi = static_cast<int>(it - times_.begin());
  const int lo = hi - 1;
  const double s = (t - time(lo)) / (time(hi) - time(lo));
  return ((1.0 - s) * values_.row(lo) + s * values_.row(hi)).transpose();
}

PathPrefix::PathPrefix(const Trajectory& path, int last) : path_(&path), last_(last) {
  if (last < 0 || last >= path.size()) {
    throw StructuralError("path prefix: index " + std::to_string(last) + " outside path of " +
                          std::to_string(path.size()) + " samples");
  }
}

double PathPrefix::time(int k) const {
  if (k < 0 || k > last_) throw StructuralError("path prefix: read beyond the current time");
  return path_->time(k);
}

Vector PathPrefix::at(int k) const {
  if (k < 0 || k > last_) throw StructuralError("path prefix: read beyond the current time");
  return (*path_)[k];
}

double inner_product(const Trajectory& a, const Trajectory& b, const Vector& weights) {
  if (a.size() != b.size() || a.dim() != b.dim() || weights.size() != a.size()) {
    throw StructuralError("inner product: mismatched paths");
  }
  return (a.values().cwiseProduct(b.values()).rowwise().sum()).dot(weights);
}

double l2_norm(const Trajectory& a, const Vector& weights) {
  return std::sqrt(std::max(0.0, inner_product(a, a, weights)));
}

double max_norm(const Trajectory& a) {
  if (a.size() == 0 || a.dim() == 0) return 0.0;
  return a.values().rowwise().norm().maxCoeff();
}

}  // namespace teamopt
