#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "teamopt/box.hpp"
#include "teamopt/grid.hpp"
#include "teamopt/infostruct.hpp"
#include "teamopt/types.hpp"

namespace teamopt {

using DynamicsFn = std::function<Vector(double t, const Vector& x, const Vector& u)>;
using JacobianFn = std::function<Matrix(double t, const Vector& x, const Vector& u)>;
using RunningCostFn = std::function<double(double t, const Vector& x, const Vector& u)>;
using RunningGradFn = std::function<Vector(double t, const Vector& x, const Vector& u)>;
using TerminalCostFn = std::function<double(const Vector& x)>;
using TerminalGradFn = std::function<Vector(const Vector& x)>;
/// Observation y(t) = h(t, x). The whole state path is handed over; a
/// well-posed observation reads it only on [0, t].
using ObservationFn = std::function<Vector(double t, const Trajectory& x)>;

struct DecisionMaker {
  std::string name;
  int control_dim = 1;
  /// Empty bounds mean unbounded.
  Box box;
  InfoSpec info;
  /// Empty means the member observes the full current state.
  ObservationFn observe;
  /// Output length of `observe`; 0 when `observe` is empty.
  int observation_dim = 0;

  Box action_set() const;
  Trajectory observations(const Trajectory& x) const;
};

/// Observation that reads the listed state components at the current time.
ObservationFn observe_components(std::vector<int> indices);

/// A continuous-time team problem. The stacked control u = (u^1, ..., u^N)
/// has length sum_i d_i. Optional derivative callbacks fall back to central
/// finite differences.
struct TeamProblem {
  int state_dim = 0;
  double horizon = 1.0;
  Vector x0;
  std::vector<DecisionMaker> members;

  DynamicsFn dynamics;
  JacobianFn dynamics_jac_x;
  JacobianFn dynamics_jac_u;

  RunningCostFn running_cost;
  RunningGradFn running_cost_grad_x;
  RunningGradFn running_cost_grad_u;

  TerminalCostFn terminal_cost;
  TerminalGradFn terminal_cost_grad;

  int num_members() const { return static_cast<int>(members.size()); }
  int control_dim() const;
  int control_offset(int member) const;

  /// Throws StructuralError when sizes or mandatory callbacks are missing.
  void check_structure() const;
};

struct Violation {
  std::string check;
  int member = -1;
  std::string detail;
};

struct ValidationOptions {
  int samples = 16;
  std::uint64_t seed = 0x7ea3;
  double lipschitz_cap = 1e6;
  /// Nodes of the auxiliary grid used for causality probes.
  int probe_steps = 40;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Sampled evidence for the standing assumptions: Lipschitz ratios of f in x
/// and u, linear growth, causality of observations, nonempty boxes. An empty
/// report means nothing was detected. Callback outputs of the wrong size
/// throw StructuralError naming the callback.
ValidationReport validate_problem(const TeamProblem& p, const ValidationOptions& opts = {});

}  // namespace teamopt
