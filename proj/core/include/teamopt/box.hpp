#pragma once

#include "teamopt/types.hpp"

namespace teamopt {

/// Product of intervals [lower_c, upper_c]; entries may be infinite.
struct Box {
  Vector lower;
  Vector upper;

  static Box unbounded(int dim);
  static Box uniform(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lower.size()); }
  bool nonempty() const;
  /// True when every bound is finite.
  bool bounded() const;
  /// True when no bound is finite.
  bool free() const;
  bool contains(const Vector& v, double slack = 0.0) const;
  Vector clip(const Vector& v) const;
};

}  // namespace teamopt
