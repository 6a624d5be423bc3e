#pragma once

#include <vector>

#include "teamopt/grid.hpp"
#include "teamopt/types.hpp"

namespace teamopt {

/// Strategy of a single member: basis coefficients (empty for open-loop
/// members) and the realized control path on the control nodes.
struct MemberStrategy {
  Vector coefficients;
  Trajectory control;
};

/// Joint strategy of all members. Controls share one set of nodes.
struct StrategyProfile {
  std::vector<MemberStrategy> members;

  int size() const { return static_cast<int>(members.size()); }
  const Trajectory& control(int i) const { return members[static_cast<std::size_t>(i)].control; }
  int control_dim() const;
  int nodes() const;

  /// Stacked control (u^1, ..., u^N) at node k.
  Vector stacked(int k) const;
  /// Stacked control at the midpoint of [t_k, t_{k+1}]: cubic through the
  /// four nearest nodes (linear when there are fewer than four).
  Vector stacked_midpoint(int k) const;
  Trajectory stacked() const;
};

StrategyProfile open_loop_profile(std::vector<Trajectory> controls);
/// Member i holds `values[i]` at every grid node.
StrategyProfile constant_profile(const TimeGrid& grid, const std::vector<Vector>& values);

/// Elementwise a + scale * b over matching members (controls only; basis
/// coefficients are dropped).
StrategyProfile axpy(const StrategyProfile& a, double scale, const StrategyProfile& b);

}  // namespace teamopt
