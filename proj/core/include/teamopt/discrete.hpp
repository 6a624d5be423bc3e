#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "teamopt/model.hpp"
#include "teamopt/profile.hpp"
#include "teamopt/team_solver.hpp"

namespace teamopt {

using TransitionFn = std::function<Vector(int k, const Vector& x, const Vector& u)>;
using StepJacobianFn = std::function<Matrix(int k, const Vector& x, const Vector& u)>;
using StepCostFn = std::function<double(int k, const Vector& x, const Vector& u)>;
using StepGradFn = std::function<Vector(int k, const Vector& x, const Vector& u)>;

/// x(k+1) = f(k, x(k), u_k), k = 0..T-1, with cost
/// J = sum_k l(k, x(k), u_k) + phi(x(T)). Controls live on steps 0..T-1;
/// observations are called with t = k.
struct DiscreteTeamProblem {
  int state_dim = 0;
  int steps = 1;
  Vector x0;
  std::vector<DecisionMaker> members;

  TransitionFn transition;
  StepJacobianFn transition_jac_x;
  StepJacobianFn transition_jac_u;

  StepCostFn running_cost;
  StepGradFn running_cost_grad_x;
  StepGradFn running_cost_grad_u;

  TerminalCostFn terminal_cost;
  TerminalGradFn terminal_cost_grad;

  int num_members() const { return static_cast<int>(members.size()); }
  int control_dim() const;
  int control_offset(int member) const;
  void check_structure() const;
};

/// Control nodes 0, 1, ..., T-1.
std::vector<double> control_steps(const DiscreteTeamProblem& p);
StrategyProfile discrete_constant_profile(const DiscreteTeamProblem& p,
                                          const std::vector<Vector>& values);

Trajectory discrete_forward(const DiscreteTeamProblem& p, const StrategyProfile& u);
/// psi(T) = phi_x(x(T)); psi(k) = f_x(k)^* psi(k+1) + l_x(k). With this
/// sign dJ/du_k = H_u(k, x(k), psi(k+1), u_k) exactly.
Trajectory discrete_adjoint(const DiscreteTeamProblem& p, const StrategyProfile& u,
                            const Trajectory& x);
double discrete_cost(const DiscreteTeamProblem& p, const StrategyProfile& u);

/// H(k, x, psi_next, u) = <f(k, x, u), psi_next> + l(k, x, u).
double discrete_hamiltonian(const DiscreteTeamProblem& p, int k, const Vector& x,
                            const Vector& psi_next, const Vector& u);
Vector discrete_hamiltonian_grad_u(const DiscreteTeamProblem& p, int k, const Vector& x,
                                   const Vector& psi_next, const Vector& u);

class DiscreteModel final : public SweepModel {
 public:
  explicit DiscreteModel(const DiscreteTeamProblem& problem);

  int num_members() const override { return problem_->num_members(); }
  const DecisionMaker& member(int i) const override;
  const std::vector<double>& control_times() const override { return times_; }
  const Vector& weights() const override { return weights_; }
  Trajectory state(const StrategyProfile& u) const override;
  double cost(const StrategyProfile& u) const override;
  Sweep sweep(const StrategyProfile& u) const override;
  Trajectory observations(int i, const Trajectory& x) const override;
  double hamiltonian(int k, const Vector& x, const Vector& psi, const Vector& u) const override;
  Vector hamiltonian_adjoint(const Sweep& s, int k) const override;
  double terminal_cost(const Vector& x) const override;
  int state_dim() const override { return problem_->state_dim; }

 private:
  const DiscreteTeamProblem* problem_;
  std::vector<double> times_;
  Vector weights_;
};

StationarityResult discrete_stationarity_residual(const DiscreteTeamProblem& p,
                                                  const StrategyProfile& u);
std::pair<StrategyProfile, SolveReport> discrete_solve_team(const DiscreteTeamProblem& p,
                                                            const StrategyProfile& init,
                                                            const SolverOptions& opts = {});

/// Explicit Euler transcription of a continuous problem on `steps` steps:
/// f_d = x + h f(kh, x, u), l_d = h l(kh, x, u).
DiscreteTeamProblem euler_transcription(const TeamProblem& p, int steps);

/// Time-invariant discrete LQ data; same cost layout as LQData.
struct DiscreteLQData {
  int state_dim = 0;
  std::vector<int> control_dims;
  int steps = 1;
  Vector x0;
  Matrix A, B, H, R, E, M;
  Vector b, F, m, N;
};

DiscreteTeamProblem to_discrete_problem(const DiscreteLQData& lq,
                                        std::vector<DecisionMaker> members = {});

}  // namespace teamopt
