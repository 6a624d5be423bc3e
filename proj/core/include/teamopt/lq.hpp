#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "teamopt/gnf.hpp"
#include "teamopt/grid.hpp"
#include "teamopt/model.hpp"
#include "teamopt/profile.hpp"
#include "teamopt/team_solver.hpp"

namespace teamopt {

using MatrixFn = std::function<Matrix(double t)>;
using VectorFn = std::function<Vector(double t)>;

/// Linear-quadratic game:
///   f = A x + b + B u
///   l = 1/2 <u, R u> + 1/2 <x, H x> + <x, F> + <u, E x> + <u, m>
///   phi = 1/2 <x, M x> + <x, N>
/// Unset coefficient callbacks are zero.
struct LQData {
  int state_dim = 0;
  std::vector<int> control_dims;
  double horizon = 1.0;
  Vector x0;

  MatrixFn A, B, H, R, E;
  VectorFn b, F, m;
  Matrix terminal_weight;  // M(T)
  Vector terminal_linear;  // N(T)

  int control_dim() const;
  int control_offset(int member) const;

  static MatrixFn constant(Matrix value);
  static VectorFn constant_vector(Vector value);
};

/// LQ coefficients sampled at the grid nodes; linear between them.
class LQTable {
 public:
  struct Coefficients {
    Matrix A, B, H, R, E;
    Vector b, F, m;
  };

  LQTable(const LQData& lq, const TimeGrid& grid);

  const Coefficients& node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
  Coefficients at(double t) const;
  const TimeGrid& grid() const { return grid_; }

 private:
  TimeGrid grid_;
  std::vector<Coefficients> nodes_;
};

/// Throws StructuralError unless sizes match, R is symmetric positive definite
/// and H, M are symmetric positive semidefinite at every node.
void check_lq(const LQData& lq, const TimeGrid& grid);

/// Team problem whose callbacks use the sampled coefficients, with analytic
/// derivatives.
TeamProblem to_team_problem(const LQData& lq, const TimeGrid& grid,
                            std::vector<DecisionMaker> members = {});
GnfData to_gnf(const LQData& lq, const TimeGrid& grid);

struct MatrixTrajectory {
  std::vector<double> times;
  std::vector<Matrix> values;

  int size() const { return static_cast<int>(values.size()); }
};

/// psi(t) = Sigma(t) x(t) + beta(t).
struct AdjointRep {
  MatrixTrajectory sigma;
  Trajectory beta;

  Trajectory adjoint(const Trajectory& x) const;
};

/// Backward RK4 for Sigma' + A^* Sigma + Sigma A + H = 0, Sigma(T) = M(T).
MatrixTrajectory solve_sigma(const LQData& lq, const TimeGrid& grid);
/// Backward RK4 for beta' + A^* beta + Sigma b + F + Sigma B u + E^* u = 0,
/// beta(T) = N(T). Sigma is Hermite-interpolated between nodes.
Trajectory solve_beta(const LQData& lq, const TimeGrid& grid, const MatrixTrajectory& sigma,
                      const StrategyProfile& u);

struct DecentralizedSolution {
  StrategyProfile profile;
  AdjointRep adjoint;
  SolveReport report;
};

/// Damped fixed point of the explicit decentralized LQ strategies, with psi
/// taken from the Sigma/beta representation. Works for any number of members;
/// action sets are unbounded.
DecentralizedSolution solve_decentralized_lq(const LQData& lq,
                                             const std::vector<DecisionMaker>& members,
                                             const TimeGrid& grid,
                                             const FixedPointOptions& opts = {});

}  // namespace teamopt
