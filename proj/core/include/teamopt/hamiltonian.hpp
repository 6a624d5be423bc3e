#pragma once

#include "teamopt/model.hpp"
#include "teamopt/types.hpp"

namespace teamopt {

/// H = <f, psi> + l together with its partial derivatives. `grad_u` is the
/// stacked gradient; member blocks follow `TeamProblem::control_offset`.
struct HamiltonianEval {
  double value = 0.0;
  Vector grad_x;
  Vector grad_u;

  Vector member_block(const TeamProblem& p, int member) const;
};

HamiltonianEval eval_hamiltonian(const TeamProblem& p, double t, const Vector& x,
                                 const Vector& psi, const Vector& u);

double hamiltonian_value(const TeamProblem& p, double t, const Vector& x, const Vector& psi,
                         const Vector& u);
/// f_x^* psi + l_x; the adjoint right-hand side is its negative.
Vector hamiltonian_grad_x(const TeamProblem& p, double t, const Vector& x, const Vector& psi,
                          const Vector& u);
/// f_u^* psi + l_u.
Vector hamiltonian_grad_u(const TeamProblem& p, double t, const Vector& x, const Vector& psi,
                          const Vector& u);

// Derivatives with finite-difference fallback.
Matrix dynamics_jac_x(const TeamProblem& p, double t, const Vector& x, const Vector& u);
Matrix dynamics_jac_u(const TeamProblem& p, double t, const Vector& x, const Vector& u);
Vector running_cost_grad_x(const TeamProblem& p, double t, const Vector& x, const Vector& u);
Vector running_cost_grad_u(const TeamProblem& p, double t, const Vector& x, const Vector& u);
Vector terminal_cost_grad(const TeamProblem& p, const Vector& x);

/// Evaluates f and throws on wrong size or non-finite output.
Vector eval_dynamics(const TeamProblem& p, double t, const Vector& x, const Vector& u);

}  // namespace teamopt
