#pragma once

#include "teamopt/grid.hpp"
#include "teamopt/model.hpp"
#include "teamopt/profile.hpp"

namespace teamopt {

/// Classical RK4 for x' = f(t, x, u), x(0) = x0. Half-step controls come from
/// StrategyProfile::stacked_midpoint. Throws IntegrationError at the first
/// non-finite node.
Trajectory integrate_forward(const TeamProblem& p, const StrategyProfile& u, const TimeGrid& grid);

struct ForwardSweep {
  Trajectory state;
  /// Integral of l along the path, by the same RK4 steps as the state.
  double running_cost = 0.0;
};

ForwardSweep integrate_forward_with_cost(const TeamProblem& p, const StrategyProfile& u,
                                         const TimeGrid& grid);

/// Backward RK4 for psi' = -H_x(t, x, psi, u), psi(T) = phi_x(x(T)).
/// Off-node states use the cubic Hermite interpolant built from x and f at
/// the nodes; controls as in the forward sweep.
Trajectory integrate_adjoint(const TeamProblem& p, const StrategyProfile& u, const Trajectory& x,
                             const TimeGrid& grid);

/// Z' = f_x Z + f_u du, Z(0) = 0, discretized as the exact tangent of the
/// forward RK4 map: stage states are regenerated from the nodal x.
Trajectory integrate_variational(const TeamProblem& p, const StrategyProfile& nominal,
                                 const StrategyProfile& direction, const Trajectory& x,
                                 const TimeGrid& grid);

}  // namespace teamopt
