#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "teamopt/grid.hpp"
#include "teamopt/infostruct.hpp"
#include "teamopt/model.hpp"
#include "teamopt/profile.hpp"

namespace teamopt {

struct SolverOptions {
  /// Stationarity tolerance on rho.
  double tol = 1e-5;
  /// Per-cycle cost improvement below which block descent stops.
  double cost_tol = 1e-8;
  int max_iterations = 5000;
  int max_cycles = 1000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  double max_step = 1e6;
  int max_backtracks = 60;
  /// Random perturbations compared by the sufficiency certificate; 0 skips it.
  int certificate_samples = 16;
  std::uint64_t seed = 0x51ab;
};

struct SufficiencyEvidence {
  int convexity_samples = 0;
  /// Largest H(mid) - (H(a) + H(b)) / 2 seen (positive means a violation).
  double worst_hamiltonian_gap = 0.0;
  double worst_terminal_gap = 0.0;
  int perturbations = 0;
  /// min over perturbations of J(u) - J(u_opt).
  double min_cost_gap = 0.0;
  bool hamiltonian_convex = false;
  bool terminal_convex = false;
  bool perturbations_passed = false;
};

struct SufficiencyCertificate {
  bool holds = false;
  SufficiencyEvidence evidence;
};

struct SolveReport {
  int iterations = 0;
  double cost = 0.0;
  double residual = 0.0;
  std::vector<double> member_residuals;
  std::vector<double> cost_history;
  bool converged = false;
  bool diverged = false;
  /// Accepted steps per block-descent cycle (empty for joint solvers).
  std::vector<int> cycle_steps;
  std::string termination;
  std::vector<std::string> warnings;
  bool has_certificate = false;
  SufficiencyCertificate certificate;
};

/// x, psi and the member blocks of H_u at every control node for one profile.
struct Sweep {
  Trajectory state;
  Trajectory adjoint;
  std::vector<Trajectory> hamiltonian_grad;
  double cost = 0.0;
};

/// Projected Hamiltonian gradients r^i and the variational-inequality
/// violation rho = max_i rho^i.
struct StationarityResult {
  double rho = 0.0;
  std::vector<double> member_rho;
  std::vector<Trajectory> residuals;
};

/// The pieces of a problem that descent, stationarity and certification need,
/// independent of whether time is continuous or discrete.
class SweepModel {
 public:
  virtual ~SweepModel() = default;

  virtual int num_members() const = 0;
  virtual const DecisionMaker& member(int i) const = 0;
  virtual const std::vector<double>& control_times() const = 0;
  /// Quadrature weights over the control nodes.
  virtual const Vector& weights() const = 0;

  virtual Trajectory state(const StrategyProfile& u) const = 0;
  virtual double cost(const StrategyProfile& u) const = 0;
  virtual Sweep sweep(const StrategyProfile& u) const = 0;
  /// Observation path of member i sampled on the control nodes.
  virtual Trajectory observations(int i, const Trajectory& x) const = 0;

  /// H at control node k paired with the adjoint it uses there.
  virtual double hamiltonian(int k, const Vector& x, const Vector& psi, const Vector& u) const = 0;
  virtual Vector hamiltonian_adjoint(const Sweep& s, int k) const = 0;
  virtual double terminal_cost(const Vector& x) const = 0;
  virtual int state_dim() const = 0;
};

class ContinuousModel final : public SweepModel {
 public:
  ContinuousModel(const TeamProblem& problem, const TimeGrid& grid);

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

  const TeamProblem& problem() const { return *problem_; }
  const TimeGrid& grid() const { return grid_; }

 private:
  const TeamProblem* problem_;
  TimeGrid grid_;
  std::vector<double> times_;
  Vector weights_;
};

/// Subspaces of every member built from the observations along x.
std::vector<InfoSubspace> build_subspaces(const SweepModel& model, const Trajectory& x);

/// Makes a profile admissible: basis members get coefficients (projecting the
/// control when none are given) and all controls are moved into the boxes.
StrategyProfile make_admissible(const SweepModel& model, const StrategyProfile& u);

/// Zero control moved into the boxes.
StrategyProfile default_profile(const SweepModel& model);

StationarityResult stationarity_from_sweep(const SweepModel& model, const StrategyProfile& u,
                                           const Sweep& sweep,
                                           const std::vector<InfoSubspace>& subspaces);
StationarityResult stationarity(const SweepModel& model, const StrategyProfile& u);

/// Pointwise violation of <r, v - u> >= 0 over v in the box. Bounded
/// coordinates contribute their worst vertex; coordinates that are unbounded
/// in the direction of -r contribute |r_c| through a Euclidean norm.
double box_violation(const Vector& r, const Vector& u, const Box& box);

/// Gradient of J with respect to the basis coefficients (or nodal controls)
/// of every member: sum_k w_k Phi_k^T H_{u^i}(t_k).
std::vector<Vector> coefficient_gradient(const SweepModel& model, const Sweep& sweep,
                                         const std::vector<InfoSubspace>& subspaces);

std::pair<StrategyProfile, SolveReport> projected_descent(const SweepModel& model,
                                                          const StrategyProfile& init,
                                                          const SolverOptions& opts);
std::pair<StrategyProfile, SolveReport> block_descent(const SweepModel& model,
                                                      const StrategyProfile& init,
                                                      const SolverOptions& opts);
SufficiencyCertificate certify(const SweepModel& model, const StrategyProfile& u, int samples,
                               std::uint64_t seed);

// Continuous-time entry points.

/// Forward sweep with l integrated by the same RK4 steps, plus phi(x(T)).
double evaluate_cost(const TeamProblem& p, const StrategyProfile& u, const TimeGrid& grid);
StationarityResult stationarity_residual(const TeamProblem& p, const StrategyProfile& u,
                                         const TimeGrid& grid);
/// Directional derivative of J along `direction` from the adjoint:
/// integral of <H_u, du> by the trapezoid rule.
double adjoint_directional_derivative(const TeamProblem& p, const StrategyProfile& u,
                                      const StrategyProfile& direction, const TimeGrid& grid);
std::pair<StrategyProfile, SolveReport> solve_team(const TeamProblem& p,
                                                   const StrategyProfile& init,
                                                   const TimeGrid& grid,
                                                   const SolverOptions& opts = {});
std::pair<StrategyProfile, SolveReport> solve_pbp(const TeamProblem& p,
                                                  const StrategyProfile& init,
                                                  const TimeGrid& grid,
                                                  const SolverOptions& opts = {});
SufficiencyCertificate sufficiency_certificate(const TeamProblem& p, const StrategyProfile& u,
                                               const TimeGrid& grid, int samples,
                                               std::uint64_t seed = 0x51ab);

}  // namespace teamopt
