#pragma once

#include <span>
#include <vector>

#include "teamopt/types.hpp"

namespace teamopt {

/// Uniform grid t_k = k T / K on [0, T].
class TimeGrid {
 public:
  /// Nodes per unit of horizon used by `with_default_resolution`.
  static constexpr int kDefaultStepsPerUnit = 200;

  TimeGrid(double horizon, int steps);

  static TimeGrid with_default_resolution(double horizon);

  int steps() const { return steps_; }
  int size() const { return steps_ + 1; }
  double horizon() const { return horizon_; }
  double step() const { return horizon_ / steps_; }
  double node(int k) const;

  std::vector<double> nodes() const;
  /// Composite trapezoid weights; `weights.dot(values)` integrates a nodal
  /// function over [0, T].
  Vector trapezoid_weights() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  int steps_;
};

/// A vector-valued path sampled at strictly increasing times. Row k of
/// `values()` is the sample at `time(k)`.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, Matrix values);
  Trajectory(const TimeGrid& grid, int dim);

  int size() const { return static_cast<int>(times_.size()); }
  int dim() const { return static_cast<int>(values_.cols()); }

  double time(int k) const { return times_[static_cast<std::size_t>(k)]; }
  std::span<const double> times() const { return times_; }

  Vector operator[](int k) const { return values_.row(k).transpose(); }
  void set(int k, const Vector& v) { values_.row(k) = v.transpose(); }

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }

  /// Linear interpolation between samples, clamped at the ends.
  Vector at(double t) const;

  bool all_finite() const { return values_.allFinite(); }
  bool same_times(const Trajectory& other) const { return times_ == other.times_; }

 private:
  std::vector<double> times_;
  Matrix values_;
};

/// Read-only view of a path restricted to samples 0..last. Anything computed
/// from a prefix is causal by construction.
class PathPrefix {
 public:
  PathPrefix(const Trajectory& path, int last);

  int last() const { return last_; }
  double time() const { return path_->time(last_); }
  double time(int k) const;
  Vector current() const { return (*path_)[last_]; }
  Vector at(int k) const;
  int dim() const { return path_->dim(); }

 private:
  const Trajectory* path_;
  int last_;
};

/// Discrete L2 inner product sum_k w_k <a_k, b_k>.
double inner_product(const Trajectory& a, const Trajectory& b, const Vector& weights);
double l2_norm(const Trajectory& a, const Vector& weights);
double max_norm(const Trajectory& a);

}  // namespace teamopt
