#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "teamopt/grid.hpp"
#include "teamopt/infostruct.hpp"
#include "teamopt/model.hpp"
#include "teamopt/profile.hpp"
#include "teamopt/team_solver.hpp"

namespace teamopt {

/// Game in generalized normal form:
///   f(t, x, u) = drift(t, x) + input(t, x) u
///   l(t, x, u) = 1/2 <u, weight(t, x) u> + 1/2 state_cost(t, x) + <u, linear(t, x)>
/// `input` is n x d with member column blocks; `weight` is d x d with blocks
/// R_ij and must be symmetric positive definite.
struct GnfData {
  int state_dim = 0;
  std::vector<int> control_dims;
  double horizon = 1.0;
  Vector x0;

  std::function<Vector(double, const Vector&)> drift;
  std::function<Matrix(double, const Vector&)> input;
  std::function<Matrix(double, const Vector&)> weight;
  std::function<double(double, const Vector&)> state_cost;
  std::function<Vector(double, const Vector&)> linear;

  TerminalCostFn terminal_cost;
  TerminalGradFn terminal_cost_grad;

  // Optional analytic state derivatives; finite differences otherwise.
  JacobianFn dynamics_jac_x;
  RunningGradFn running_cost_grad_x;

  int control_dim() const;
  int control_offset(int member) const;
};

/// Members default to open-loop when `members` is empty; their control
/// dimensions are always taken from the data.
TeamProblem to_team_problem(const GnfData& gnf, std::vector<DecisionMaker> members = {});

/// One Gauss-Seidel pass of the explicit stationarity map. For member i the
/// new control solves Pi_i(R_ii u^i + eta^i + sum_{j != i} R_ij u^j + g^(i)* psi) = 0
/// within its subspace; members j < i already use their updated controls.
/// Open-loop members solve nodewise; basis members solve the Galerkin system
/// (sum_k w_k Phi_k^T R_ii Phi_k) theta = -sum_k w_k Phi_k^T rhs_k.
StrategyProfile gnf_strategy_update(const GnfData& gnf, const TimeGrid& grid, const Trajectory& x,
                                    const Trajectory& psi, const StrategyProfile& previous,
                                    const std::vector<InfoSubspace>& subspaces);

struct FixedPointOptions {
  /// Stop when the L2 gap between successive iterates falls below this.
  double tol = 1e-8;
  double damping = 0.5;
  int max_iterations = 5000;
  /// Consecutive growing gaps that count as divergence.
  int divergence_window = 50;
};

using AdjointProvider =
    std::function<Trajectory(const StrategyProfile& u, const Trajectory& x)>;

/// Damped Picard iteration u <- (1 - gamma) u + gamma * update(u), with
/// subspaces refreshed from each state iterate. The report residual is the
/// team stationarity residual at the returned profile.
std::pair<StrategyProfile, SolveReport> damped_fixed_point(const GnfData& gnf,
                                                           const TeamProblem& problem,
                                                           const TimeGrid& grid,
                                                           const FixedPointOptions& opts,
                                                           const AdjointProvider& adjoint);

/// Fixed point with psi from the backward adjoint sweep.
std::pair<StrategyProfile, SolveReport> solve_gnf_fixed_point(
    const GnfData& gnf, const std::vector<DecisionMaker>& members, const TimeGrid& grid,
    const FixedPointOptions& opts = {});

}  // namespace teamopt
