#include "teamopt/discrete.hpp"

#include <cmath>
#include <string>

#include "teamopt/errors.hpp"
#include "teamopt/fd.hpp"

namespace teamopt {

int DiscreteTeamProblem::control_dim() const {
  int d = 0;
  for (const auto& m : members) d += m.control_dim;
  return d;
}

int DiscreteTeamProblem::control_offset(int member) const {
  int offset = 0;
  for (int i = 0; i < member; ++i) offset += members[static_cast<std::size_t>(i)].control_dim;
  return offset;
}

void DiscreteTeamProblem::check_structure() const {
  if (state_dim < 1) throw StructuralError("discrete problem: state dimension must be >= 1");
  if (steps < 1) throw StructuralError("discrete problem: steps must be >= 1");
  if (x0.size() != state_dim) {
    throw StructuralError("discrete problem: x0 dimension: expected " +
                          std::to_string(state_dim) + ", got " + std::to_string(x0.size()));
  }
  if (members.empty()) throw StructuralError("discrete problem: no decision makers");
  for (const auto& m : members) {
    if (m.control_dim < 1) throw StructuralError("discrete problem: control dimension < 1");
  }
  if (!transition || !running_cost || !terminal_cost) {
    throw StructuralError("discrete problem: transition, running and terminal cost are required");
  }
}

std::vector<double> control_steps(const DiscreteTeamProblem& p) {
  std::vector<double> out(static_cast<std::size_t>(p.steps));
  for (int k = 0; k < p.steps; ++k) out[static_cast<std::size_t>(k)] = k;
  return out;
}

StrategyProfile discrete_constant_profile(const DiscreteTeamProblem& p,
                                          const std::vector<Vector>& values) {
  std::vector<Trajectory> controls;
  for (const auto& v : values) {
    Matrix m(p.steps, v.size());
    m.rowwise() = v.transpose();
    controls.emplace_back(control_steps(p), std::move(m));
  }
  return open_loop_profile(std::move(controls));
}

namespace {

void check_profile(const DiscreteTeamProblem& p, const StrategyProfile& u) {
  if (u.size() != p.num_members()) throw StructuralError("discrete: profile member count mismatch");
  for (int i = 0; i < u.size(); ++i) {
    if (u.control(i).size() != p.steps ||
        u.control(i).dim() != p.members[static_cast<std::size_t>(i)].control_dim) {
      throw StructuralError("discrete: control of member " + std::to_string(i) +
                            " must have one row per step");
    }
  }
}

Vector transition(const DiscreteTeamProblem& p, int k, const Vector& x, const Vector& u) {
  Vector next = p.transition(k, x, u);
  if (next.size() != p.state_dim) {
    throw StructuralError("transition dimension: expected " + std::to_string(p.state_dim) +
                          ", got " + std::to_string(next.size()));
  }
  return next;
}

std::vector<double> state_times(const DiscreteTeamProblem& p) {
  std::vector<double> out(static_cast<std::size_t>(p.steps + 1));
  for (int k = 0; k <= p.steps; ++k) out[static_cast<std::size_t>(k)] = k;
  return out;
}

}  // namespace

Trajectory discrete_forward(const DiscreteTeamProblem& p, const StrategyProfile& u) {
  p.check_structure();
  check_profile(p, u);
  Matrix values(p.steps + 1, p.state_dim);
  Vector x = p.x0;
  values.row(0) = x.transpose();
  for (int k = 0; k < p.steps; ++k) {
    x = transition(p, k, x, u.stacked(k));
    if (!x.allFinite()) {
      throw IntegrationError("discrete forward recursion is not finite at step " +
                                 std::to_string(k + 1),
                             k + 1, k + 1);
    }
    values.row(k + 1) = x.transpose();
  }
  return {state_times(p), std::move(values)};
}

double discrete_hamiltonian(const DiscreteTeamProblem& p, int k, const Vector& x,
                            const Vector& psi_next, const Vector& u) {
  return transition(p, k, x, u).dot(psi_next) + p.running_cost(k, x, u);
}

Vector discrete_hamiltonian_grad_u(const DiscreteTeamProblem& p, int k, const Vector& x,
                                   const Vector& psi_next, const Vector& u) {
  Vector g;
  if (p.transition_jac_u) {
    g = p.transition_jac_u(k, x, u).transpose() * psi_next;
  } else {
    g = fd_gradient([&](const Vector& v) { return transition(p, k, x, v).dot(psi_next); }, u);
  }
  if (p.running_cost_grad_u) {
    g += p.running_cost_grad_u(k, x, u);
  } else {
    g += fd_gradient([&](const Vector& v) { return p.running_cost(k, x, v); }, u);
  }
  return g;
}

Trajectory discrete_adjoint(const DiscreteTeamProblem& p, const StrategyProfile& u,
                            const Trajectory& x) {
  p.check_structure();
  check_profile(p, u);
  if (x.size() != p.steps + 1) throw StructuralError("discrete adjoint: state has wrong length");
  Matrix values(p.steps + 1, p.state_dim);
  const Vector xT = x[p.steps];
  Vector psi = p.terminal_cost_grad
                   ? p.terminal_cost_grad(xT)
                   : fd_gradient([&](const Vector& v) { return p.terminal_cost(v); }, xT);
  values.row(p.steps) = psi.transpose();
  for (int k = p.steps - 1; k >= 0; --k) {
    const Vector xk = x[k];
    const Vector uk = u.stacked(k);
    Vector next;
    if (p.transition_jac_x) {
      next = p.transition_jac_x(k, xk, uk).transpose() * psi;
    } else {
      next = fd_gradient([&](const Vector& v) { return transition(p, k, v, uk).dot(psi); }, xk);
    }
    if (p.running_cost_grad_x) {
      next += p.running_cost_grad_x(k, xk, uk);
    } else {
      next += fd_gradient([&](const Vector& v) { return p.running_cost(k, v, uk); }, xk);
    }
    if (!next.allFinite()) {
      throw IntegrationError("discrete adjoint recursion is not finite at step " + std::to_string(k),
                             k, k);
    }
    psi = std::move(next);
    values.row(k) = psi.transpose();
  }
  return {state_times(p), std::move(values)};
}

double discrete_cost(const DiscreteTeamProblem& p, const StrategyProfile& u) {
  const Trajectory x = discrete_forward(p, u);
  double total = 0.0;
  for (int k = 0; k < p.steps; ++k) total += p.running_cost(k, x[k], u.stacked(k));
  total += p.terminal_cost(x[p.steps]);
  if (!std::isfinite(total)) throw EvaluationError("discrete cost is not finite");
  return total;
}

DiscreteModel::DiscreteModel(const DiscreteTeamProblem& problem)
    : problem_(&problem), times_(control_steps(problem)), weights_(Vector::Ones(problem.steps)) {
  problem.check_structure();
}

const DecisionMaker& DiscreteModel::member(int i) const {
  return problem_->members[static_cast<std::size_t>(i)];
}

Trajectory DiscreteModel::state(const StrategyProfile& u) const {
  return discrete_forward(*problem_, u);
}

double DiscreteModel::cost(const StrategyProfile& u) const { return discrete_cost(*problem_, u); }

Sweep DiscreteModel::sweep(const StrategyProfile& u) const {
  const auto& p = *problem_;
  Sweep s;
  s.state = discrete_forward(p, u);
  s.adjoint = discrete_adjoint(p, u, s.state);
  double total = 0.0;
  for (int i = 0; i < p.num_members(); ++i) {
    s.hamiltonian_grad.emplace_back(times_, Matrix(p.steps, member(i).control_dim));
  }
  for (int k = 0; k < p.steps; ++k) {
    const Vector xk = s.state[k];
    const Vector uk = u.stacked(k);
    total += p.running_cost(k, xk, uk);
    const Vector hu = discrete_hamiltonian_grad_u(p, k, xk, s.adjoint[k + 1], uk);
    for (int i = 0; i < p.num_members(); ++i) {
      s.hamiltonian_grad[static_cast<std::size_t>(i)].set(
          k, hu.segment(p.control_offset(i), member(i).control_dim));
    }
  }
  s.cost = total + p.terminal_cost(s.state[p.steps]);
  return s;
}

Trajectory DiscreteModel::observations(int i, const Trajectory& x) const {
  const Trajectory full = member(i).observations(x);
  return {times_, full.values().topRows(problem_->steps)};
}

double DiscreteModel::hamiltonian(int k, const Vector& x, const Vector& psi, const Vector& u) const {
  return discrete_hamiltonian(*problem_, k, x, psi, u);
}

Vector DiscreteModel::hamiltonian_adjoint(const Sweep& s, int k) const { return s.adjoint[k + 1]; }

double DiscreteModel::terminal_cost(const Vector& x) const { return problem_->terminal_cost(x); }

StationarityResult discrete_stationarity_residual(const DiscreteTeamProblem& p,
                                                  const StrategyProfile& u) {
  return stationarity(DiscreteModel(p), u);
}

std::pair<StrategyProfile, SolveReport> discrete_solve_team(const DiscreteTeamProblem& p,
                                                            const StrategyProfile& init,
                                                            const SolverOptions& opts) {
  const DiscreteModel model(p);
  auto result = projected_descent(model, init, opts);
  if (result.second.converged && opts.certificate_samples > 0) {
    result.second.certificate = certify(model, result.first, opts.certificate_samples, opts.seed);
    result.second.has_certificate = true;
  }
  return result;
}

DiscreteTeamProblem euler_transcription(const TeamProblem& p, int steps) {
  p.check_structure();
  if (steps < 1) throw StructuralError("euler transcription: steps must be >= 1");
  const double h = p.horizon / steps;
  DiscreteTeamProblem d;
  d.state_dim = p.state_dim;
  d.steps = steps;
  d.x0 = p.x0;
  d.members = p.members;
  d.transition = [p, h](int k, const Vector& x, const Vector& u) -> Vector {
    return x + h * p.dynamics(k * h, x, u);
  };
  if (p.dynamics_jac_x) {
    d.transition_jac_x = [p, h](int k, const Vector& x, const Vector& u) -> Matrix {
      return Matrix::Identity(p.state_dim, p.state_dim) + h * p.dynamics_jac_x(k * h, x, u);
    };
  }
  if (p.dynamics_jac_u) {
    d.transition_jac_u = [p, h](int k, const Vector& x, const Vector& u) -> Matrix {
      return h * p.dynamics_jac_u(k * h, x, u);
    };
  }
  d.running_cost = [p, h](int k, const Vector& x, const Vector& u) {
    return h * p.running_cost(k * h, x, u);
  };
  if (p.running_cost_grad_x) {
    d.running_cost_grad_x = [p, h](int k, const Vector& x, const Vector& u) -> Vector {
      return h * p.running_cost_grad_x(k * h, x, u);
    };
  }
  if (p.running_cost_grad_u) {
    d.running_cost_grad_u = [p, h](int k, const Vector& x, const Vector& u) -> Vector {
      return h * p.running_cost_grad_u(k * h, x, u);
    };
  }
  d.terminal_cost = p.terminal_cost;
  d.terminal_cost_grad = p.terminal_cost_grad;
  return d;
}

DiscreteTeamProblem to_discrete_problem(const DiscreteLQData& lq,
                                        std::vector<DecisionMaker> members) {
  const int n = lq.state_dim;
  int d = 0;
  for (int di : lq.control_dims) d += di;
  auto or_zero = [](const Matrix& m, int r, int c, const char* name) -> Matrix {
    if (m.size() == 0) return Matrix::Zero(r, c);
    if (m.rows() != r || m.cols() != c) {
      throw StructuralError(std::string("discrete lq: ") + name + " must be " +
                            std::to_string(r) + "x" + std::to_string(c));
    }
    return m;
  };
  auto or_zero_vec = [](const Vector& v, int r, const char* name) -> Vector {
    if (v.size() == 0) return Vector::Zero(r);
    if (v.size() != r) {
      throw StructuralError(std::string("discrete lq: ") + name + " must have length " +
                            std::to_string(r));
    }
    return v;
  };
  if (n < 1 || d < 1) throw StructuralError("discrete lq: dimensions must be >= 1");
  const Matrix A = or_zero(lq.A, n, n, "A"), B = or_zero(lq.B, n, d, "B");
  const Matrix H = or_zero(lq.H, n, n, "H"), R = or_zero(lq.R, d, d, "R");
  const Matrix E = or_zero(lq.E, d, n, "E"), M = or_zero(lq.M, n, n, "M");
  const Vector b = or_zero_vec(lq.b, n, "b"), F = or_zero_vec(lq.F, n, "F");
  const Vector m = or_zero_vec(lq.m, d, "m"), N = or_zero_vec(lq.N, n, "N");

  DiscreteTeamProblem p;
  p.state_dim = n;
  p.steps = lq.steps;
  p.x0 = lq.x0;
  if (members.empty()) {
    for (std::size_t i = 0; i < lq.control_dims.size(); ++i) {
      DecisionMaker dm;
      dm.name = "dm" + std::to_string(i + 1);
      members.push_back(std::move(dm));
    }
  }
  if (members.size() != lq.control_dims.size()) {
    throw StructuralError("discrete lq: decision maker count mismatch");
  }
  for (std::size_t i = 0; i < members.size(); ++i) members[i].control_dim = lq.control_dims[i];
  p.members = std::move(members);

  p.transition = [A, B, b](int, const Vector& x, const Vector& u) -> Vector {
    return A * x + B * u + b;
  };
  p.transition_jac_x = [A](int, const Vector&, const Vector&) -> Matrix { return A; };
  p.transition_jac_u = [B](int, const Vector&, const Vector&) -> Matrix { return B; };
  p.running_cost = [H, R, E, F, m](int, const Vector& x, const Vector& u) {
    return 0.5 * u.dot(R * u) + 0.5 * x.dot(H * x) + x.dot(F) + u.dot(E * x) + u.dot(m);
  };
  p.running_cost_grad_x = [H, E, F](int, const Vector& x, const Vector& u) -> Vector {
    return H * x + F + E.transpose() * u;
  };
  p.running_cost_grad_u = [R, E, m](int, const Vector& x, const Vector& u) -> Vector {
    return R * u + E * x + m;
  };
  p.terminal_cost = [M, N](const Vector& x) { return 0.5 * x.dot(M * x) + x.dot(N); };
  p.terminal_cost_grad = [M, N](const Vector& x) -> Vector { return M * x + N; };
  return p;
}

}  // namespace teamopt
