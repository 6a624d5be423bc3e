#include "teamopt/hamiltonian.hpp"

#include <cmath>
#include <sstream>

#include "teamopt/errors.hpp"
#include "teamopt/fd.hpp"

namespace teamopt {

namespace {

[[noreturn]] void non_finite(const std::string& what, double t, const Vector& x, const Vector& u) {
  std::ostringstream os;
  os << what << " is not finite at t=" << t << ", x=[" << x.transpose() << "], u=["
     << u.transpose() << "]";
  throw EvaluationError(os.str());
}

double eval_running_cost(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  const double l = p.running_cost(t, x, u);
  if (!std::isfinite(l)) non_finite("running cost", t, x, u);
  return l;
}

}  // namespace

Vector eval_dynamics(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  Vector f = p.dynamics(t, x, u);
  if (f.size() != p.state_dim) {
    throw StructuralError("dynamics dimension: expected " + std::to_string(p.state_dim) +
                          ", got " + std::to_string(f.size()));
  }
  if (!f.allFinite()) non_finite("dynamics", t, x, u);
  return f;
}

Matrix dynamics_jac_x(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  if (p.dynamics_jac_x) return p.dynamics_jac_x(t, x, u);
  return fd_jacobian([&](const Vector& xp) { return eval_dynamics(p, t, xp, u); }, x,
                     p.state_dim);
}

Matrix dynamics_jac_u(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  if (p.dynamics_jac_u) return p.dynamics_jac_u(t, x, u);
  return fd_jacobian([&](const Vector& up) { return eval_dynamics(p, t, x, up); }, u,
                     p.state_dim);
}

Vector running_cost_grad_x(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  if (p.running_cost_grad_x) return p.running_cost_grad_x(t, x, u);
  return fd_gradient([&](const Vector& xp) { return eval_running_cost(p, t, xp, u); }, x);
}

Vector running_cost_grad_u(const TeamProblem& p, double t, const Vector& x, const Vector& u) {
  if (p.running_cost_grad_u) return p.running_cost_grad_u(t, x, u);
  return fd_gradient([&](const Vector& up) { return eval_running_cost(p, t, x, up); }, u);
}

Vector terminal_cost_grad(const TeamProblem& p, const Vector& x) {
  if (p.terminal_cost_grad) return p.terminal_cost_grad(x);
  return fd_gradient([&](const Vector& xp) { return p.terminal_cost(xp); }, x);
}

double hamiltonian_value(const TeamProblem& p, double t, const Vector& x, const Vector& psi,
                         const Vector& u) {
  return eval_dynamics(p, t, x, u).dot(psi) + eval_running_cost(p, t, x, u);
}

Vector hamiltonian_grad_x(const TeamProblem& p, double t, const Vector& x, const Vector& psi,
                          const Vector& u) {
  Vector pairing;
  if (p.dynamics_jac_x) {
    pairing = p.dynamics_jac_x(t, x, u).transpose() * psi;
  } else {
    pairing = fd_gradient([&](const Vector& xp) { return eval_dynamics(p, t, xp, u).dot(psi); }, x);
  }
  Vector g = pairing + running_cost_grad_x(p, t, x, u);
  if (!g.allFinite()) non_finite("H_x", t, x, u);
  return g;
}

Vector hamiltonian_grad_u(const TeamProblem& p, double t, const Vector& x, const Vector& psi,
                          const Vector& u) {
  Vector pairing;
  if (p.dynamics_jac_u) {
    pairing = p.dynamics_jac_u(t, x, u).transpose() * psi;
  } else {
    pairing = fd_gradient([&](const Vector& up) { return eval_dynamics(p, t, x, up).dot(psi); }, u);
  }
  Vector g = pairing + running_cost_grad_u(p, t, x, u);
  if (!g.allFinite()) non_finite("H_u", t, x, u);
  return g;
}

HamiltonianEval eval_hamiltonian(const TeamProblem& p, double t, const Vector& x,
                                 const Vector& psi, const Vector& u) {
  if (x.size() != p.state_dim || psi.size() != p.state_dim || u.size() != p.control_dim()) {
    throw StructuralError("hamiltonian: argument dimensions do not match the problem");
  }
  HamiltonianEval out;
  out.value = hamiltonian_value(p, t, x, psi, u);
  out.grad_x = hamiltonian_grad_x(p, t, x, psi, u);
  out.grad_u = hamiltonian_grad_u(p, t, x, psi, u);
  return out;
}

Vector HamiltonianEval::member_block(const TeamProblem& p, int member) const {
  return grad_u.segment(p.control_offset(member),
                        p.members[static_cast<std::size_t>(member)].control_dim);
}

}  // namespace teamopt
