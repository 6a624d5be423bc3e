#include "teamopt/integrate.hpp"

#include <cmath>
#include <string>

#include "teamopt/errors.hpp"
#include "teamopt/hamiltonian.hpp"

namespace teamopt {

namespace {

void check_inputs(const TeamProblem& p, const StrategyProfile& u, const TimeGrid& grid) {
  if (u.size() != p.num_members()) {
    throw StructuralError("profile has " + std::to_string(u.size()) + " members, problem has " +
                          std::to_string(p.num_members()));
  }
  for (int i = 0; i < u.size(); ++i) {
    if (u.control(i).size() != grid.size()) {
      throw StructuralError("control of member " + std::to_string(i) + " has " +
                            std::to_string(u.control(i).size()) + " nodes, grid has " +
                            std::to_string(grid.size()));
    }
    if (u.control(i).dim() != p.members[static_cast<std::size_t>(i)].control_dim) {
      throw StructuralError("control of member " + std::to_string(i) + " has wrong dimension");
    }
  }
}

void check_path(const Trajectory& x, const TimeGrid& grid, int dim, const char* what) {
  if (x.size() != grid.size() || x.dim() != dim) {
    throw StructuralError(std::string(what) + " is not sampled on the grid");
  }
}

[[noreturn]] void diverged(const char* sweep, int node, const TimeGrid& grid) {
  throw IntegrationError(std::string(sweep) + " diverged at node " + std::to_string(node) +
                             " (t=" + std::to_string(grid.node(node)) + ")",
                         node, grid.node(node));
}

// Directional derivative f_x dz + f_u du at (t, x, u).
Vector tangent(const TeamProblem& p, double t, const Vector& x, const Vector& u, const Vector& dz,
               const Vector& du) {
  if (p.dynamics_jac_x && p.dynamics_jac_u) {
    return p.dynamics_jac_x(t, x, u) * dz + p.dynamics_jac_u(t, x, u) * du;
  }
  const double dir = std::sqrt(dz.squaredNorm() + du.squaredNorm());
  if (dir == 0.0) return Vector::Zero(p.state_dim);
  const double base = std::sqrt(x.squaredNorm() + u.squaredNorm());
  const double eps = 1e-6 * std::max(1.0, base) / dir;
  return (eval_dynamics(p, t, x + eps * dz, u + eps * du) -
          eval_dynamics(p, t, x - eps * dz, u - eps * du)) /
         (2.0 * eps);
}

}  // namespace

namespace {

double running_cost(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  const double l = p.running_cost(t, x, u);
  if (!std::isfinite(l)) {
    throw EvaluationError("running cost is not finite at t=" + std::to_string(t));
  }
  return l;
}

ForwardSweep forward(const TeamProblem& p, const StrategyProfile& u, const TimeGrid& grid,
                     bool with_cost) {
  p.check_structure();
  check_inputs(p, u, grid);
  const double h = grid.step();
  ForwardSweep out{Trajectory(grid, p.state_dim), 0.0};
  out.state.set(0, p.x0);
  Vector state = p.x0;
  for (int k = 0; k < grid.steps(); ++k) {
    const double t = grid.node(k);
    const Vector u0 = u.stacked(k);
    const Vector um = u.stacked_midpoint(k);
    const Vector u1 = u.stacked(k + 1);
    try {
      const Vector s2 = state;
      const Vector k1 = eval_dynamics(p, t, state, u0);
      const Vector x2 = state + 0.5 * h * k1;
      const Vector k2 = eval_dynamics(p, t + 0.5 * h, x2, um);
      const Vector x3 = state + 0.5 * h * k2;
      const Vector k3 = eval_dynamics(p, t + 0.5 * h, x3, um);
      const Vector x4 = state + h * k3;
      const Vector k4 = eval_dynamics(p, t + h, x4, u1);
      if (with_cost) {
        // running cost as an extra quadrature state of the same RK4 step
        out.running_cost += (h / 6.0) * (running_cost(p, t, s2, u0) +
                                         2.0 * running_cost(p, t + 0.5 * h, x2, um) +
                                         2.0 * running_cost(p, t + 0.5 * h, x3, um) +
                                         running_cost(p, t + h, x4, u1));
      }
      state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const EvaluationError&) {
      if (with_cost && state.allFinite()) throw;
      diverged("forward sweep", k + 1, grid);
    }
    if (!state.allFinite()) diverged("forward sweep", k + 1, grid);
    out.state.set(k + 1, state);
  }
  return out;
}

}  // namespace

Trajectory integrate_forward(const TeamProblem& p, const StrategyProfile& u, const TimeGrid& grid) {
  return forward(p, u, grid, false).state;
}

ForwardSweep integrate_forward_with_cost(const TeamProblem& p, const StrategyProfile& u,
                                         const TimeGrid& grid) {
  return forward(p, u, grid, true);
}

Trajectory integrate_adjoint(const TeamProblem& p, const StrategyProfile& u, const Trajectory& x,
                             const TimeGrid& grid) {
  p.check_structure();
  check_inputs(p, u, grid);
  check_path(x, grid, p.state_dim, "state");
  const double h = grid.step();
  const int K = grid.steps();

  Trajectory psi(grid, p.state_dim);
  Vector costate = terminal_cost_grad(p, x[K]);
  if (costate.size() != p.state_dim) {
    throw StructuralError("terminal_cost_grad dimension: expected " +
                          std::to_string(p.state_dim) + ", got " +
                          std::to_string(costate.size()));
  }
  if (!costate.allFinite()) diverged("adjoint sweep", K, grid);
  psi.set(K, costate);

  auto rhs = [&](double t, const Vector& state, const Vector& adj, const Vector& control) {
    return Vector(-hamiltonian_grad_x(p, t, state, adj, control));
  };

  Vector f_next = eval_dynamics(p, grid.node(K), x[K], u.stacked(K));
  for (int k = K - 1; k >= 0; --k) {
    const double t0 = grid.node(k);
    const double t1 = grid.node(k + 1);
    const double tm = t0 + 0.5 * h;
    const Vector u0 = u.stacked(k);
    const Vector u1 = u.stacked(k + 1);
    const Vector um = u.stacked_midpoint(k);
    const Vector x0 = x[k];
    const Vector x1 = x[k + 1];
    try {
      const Vector f_cur = eval_dynamics(p, t0, x0, u0);
      const Vector xm = 0.5 * (x0 + x1) + (h / 8.0) * (f_cur - f_next);
      const Vector k1 = rhs(t1, x1, costate, u1);
      const Vector k2 = rhs(tm, xm, costate - 0.5 * h * k1, um);
      const Vector k3 = rhs(tm, xm, costate - 0.5 * h * k2, um);
      const Vector k4 = rhs(t0, x0, costate - h * k3, u0);
      costate -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      f_next = f_cur;
    } catch (const EvaluationError&) {
      diverged("adjoint sweep", k, grid);
    }
    if (!costate.allFinite()) diverged("adjoint sweep", k, grid);
    psi.set(k, costate);
  }
  return psi;
}

Trajectory integrate_variational(const TeamProblem& p, const StrategyProfile& nominal,
                                 const StrategyProfile& direction, const Trajectory& x,
                                 const TimeGrid& grid) {
  p.check_structure();
  check_inputs(p, nominal, grid);
  check_inputs(p, direction, grid);
  check_path(x, grid, p.state_dim, "state");
  const double h = grid.step();

  Trajectory z(grid, p.state_dim);
  Vector var = Vector::Zero(p.state_dim);
  for (int k = 0; k < grid.steps(); ++k) {
    const double t = grid.node(k);
    const double tm = t + 0.5 * h;
    const Vector u0 = nominal.stacked(k);
    const Vector um = nominal.stacked_midpoint(k);
    const Vector u1 = nominal.stacked(k + 1);
    const Vector d0 = direction.stacked(k);
    const Vector dm = direction.stacked_midpoint(k);
    const Vector d1 = direction.stacked(k + 1);
    const Vector s1 = x[k];
    try {
      const Vector k1 = eval_dynamics(p, t, s1, u0);
      const Vector s2 = s1 + 0.5 * h * k1;
      const Vector k2 = eval_dynamics(p, tm, s2, um);
      const Vector s3 = s1 + 0.5 * h * k2;
      const Vector k3 = eval_dynamics(p, tm, s3, um);
      const Vector s4 = s1 + h * k3;

      const Vector l1 = tangent(p, t, s1, u0, var, d0);
      const Vector l2 = tangent(p, tm, s2, um, var + 0.5 * h * l1, dm);
      const Vector l3 = tangent(p, tm, s3, um, var + 0.5 * h * l2, dm);
      const Vector l4 = tangent(p, t + h, s4, u1, var + h * l3, d1);
      var += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    } catch (const EvaluationError&) {
      diverged("variational sweep", k + 1, grid);
    }
    if (!var.allFinite()) diverged("variational sweep", k + 1, grid);
    z.set(k + 1, var);
  }
  return z;
}

}  // namespace teamopt
