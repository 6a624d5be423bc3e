#include "teamopt/gnf.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "teamopt/errors.hpp"
#include "teamopt/integrate.hpp"

namespace teamopt {

int GnfData::control_dim() const {
  int d = 0;
  for (int di : control_dims) d += di;
  return d;
}

int GnfData::control_offset(int member) const {
  int offset = 0;
  for (int i = 0; i < member; ++i) offset += control_dims[static_cast<std::size_t>(i)];
  return offset;
}

namespace {

std::vector<DecisionMaker> resolve_members(std::vector<DecisionMaker> members,
                                           const std::vector<int>& control_dims) {
  if (members.empty()) {
    for (std::size_t i = 0; i < control_dims.size(); ++i) {
      DecisionMaker m;
      m.name = "dm" + std::to_string(i + 1);
      members.push_back(std::move(m));
    }
  }
  if (members.size() != control_dims.size()) {
    throw StructuralError("expected " + std::to_string(control_dims.size()) +
                          " decision makers, got " + std::to_string(members.size()));
  }
  for (std::size_t i = 0; i < members.size(); ++i) members[i].control_dim = control_dims[i];
  return members;
}

}  // namespace

TeamProblem to_team_problem(const GnfData& gnf, std::vector<DecisionMaker> members) {
  if (!gnf.drift || !gnf.input || !gnf.weight) {
    throw StructuralError("gnf: drift, input and weight callbacks are required");
  }
  TeamProblem p;
  p.state_dim = gnf.state_dim;
  p.horizon = gnf.horizon;
  p.x0 = gnf.x0;
  p.members = resolve_members(std::move(members), gnf.control_dims);

  p.dynamics = [gnf](double t, const Vector& x, const Vector& u) -> Vector {
    return gnf.drift(t, x) + gnf.input(t, x) * u;
  };
  p.dynamics_jac_u = [gnf](double t, const Vector& x, const Vector&) -> Matrix {
    return gnf.input(t, x);
  };
  p.dynamics_jac_x = gnf.dynamics_jac_x;

  p.running_cost = [gnf](double t, const Vector& x, const Vector& u) {
    double l = 0.5 * u.dot(gnf.weight(t, x) * u);
    if (gnf.state_cost) l += 0.5 * gnf.state_cost(t, x);
    if (gnf.linear) l += u.dot(gnf.linear(t, x));
    return l;
  };
  p.running_cost_grad_u = [gnf](double t, const Vector& x, const Vector& u) -> Vector {
    const Matrix r = gnf.weight(t, x);
    Vector g = 0.5 * (r + r.transpose()) * u;
    if (gnf.linear) g += gnf.linear(t, x);
    return g;
  };
  p.running_cost_grad_x = gnf.running_cost_grad_x;

  p.terminal_cost = gnf.terminal_cost;
  p.terminal_cost_grad = gnf.terminal_cost_grad;
  return p;
}

StrategyProfile gnf_strategy_update(const GnfData& gnf, const TimeGrid& grid, const Trajectory& x,
                                    const Trajectory& psi, const StrategyProfile& previous,
                                    const std::vector<InfoSubspace>& subspaces) {
  const int n_members = static_cast<int>(gnf.control_dims.size());
  if (previous.size() != n_members || static_cast<int>(subspaces.size()) != n_members) {
    throw StructuralError("gnf update: member count mismatch");
  }
  if (x.size() != grid.size() || psi.size() != grid.size()) {
    throw StructuralError("gnf update: state and adjoint must be sampled on the grid");
  }
  const Vector w = grid.trapezoid_weights();

  struct NodeData {
    Matrix input, weight;
    Vector linear;
  };
  std::vector<NodeData> data(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    const Vector xk = x[k];
    auto& nd = data[static_cast<std::size_t>(k)];
    nd.input = gnf.input(t, xk);
    nd.weight = gnf.weight(t, xk);
    nd.linear = gnf.linear ? gnf.linear(t, xk) : Vector::Zero(gnf.control_dim());
  }

  StrategyProfile out = previous;
  for (int i = 0; i < n_members; ++i) {
    const int di = gnf.control_dims[static_cast<std::size_t>(i)];
    const int oi = gnf.control_offset(i);
    const auto& sub = subspaces[static_cast<std::size_t>(i)];

    // rhs_k = eta^i + sum_{j != i} R_ij u^j + g^(i)* psi
    Trajectory rhs(grid, di);
    for (int k = 0; k < grid.size(); ++k) {
      const auto& nd = data[static_cast<std::size_t>(k)];
      Vector u = out.stacked(k);
      u.segment(oi, di).setZero();
      Vector r = nd.linear.segment(oi, di) + nd.weight.middleRows(oi, di) * u +
                 nd.input.middleCols(oi, di).transpose() * psi[k];
      rhs.set(k, r);
    }

    auto& member = out.members[static_cast<std::size_t>(i)];
    if (sub.is_identity()) {
      for (int k = 0; k < grid.size(); ++k) {
        const Matrix rii = data[static_cast<std::size_t>(k)].weight.block(oi, oi, di, di);
        const Eigen::LLT<Matrix> llt(0.5 * (rii + rii.transpose()));
        if (llt.info() != Eigen::Success) {
          throw SingularityError("gnf update: R_ii of member " + std::to_string(i) +
                                     " is not positive definite at node " + std::to_string(k),
                                 i, k);
        }
        member.control.set(k, -llt.solve(rhs[k]));
      }
      member.coefficients.resize(0);
    } else {
      const int m = sub.basis_size();
      Matrix galerkin = Matrix::Zero(m, m);
      for (int k = 0; k < grid.size(); ++k) {
        const Matrix phi = sub.basis().middleRows(static_cast<Eigen::Index>(k) * di, di);
        const Matrix rii = data[static_cast<std::size_t>(k)].weight.block(oi, oi, di, di);
        galerkin += w[k] * phi.transpose() * rii * phi;
      }
      galerkin = 0.5 * (galerkin + galerkin.transpose());
      galerkin += sub.regularization() * Matrix::Identity(m, m);
      const Eigen::LDLT<Matrix> ldlt(galerkin);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().minCoeff() <= 0.0) {
        throw SingularityError("gnf update: projected R_ii of member " + std::to_string(i) +
                                   " is singular",
                               i, -1);
      }
      member.coefficients = -ldlt.solve(sub.moments(rhs));
      member.control = sub.realize(member.coefficients);
    }
  }
  return out;
}

namespace {

SolveReport diverged_report(SolveReport report, const std::exception& e) {
  report.diverged = true;
  report.converged = false;
  report.termination = std::string("diverged: ") + e.what();
  report.cost = kInfinity;
  report.residual = kInfinity;
  return report;
}

}  // namespace

std::pair<StrategyProfile, SolveReport> damped_fixed_point(const GnfData& gnf,
                                                           const TeamProblem& problem,
                                                           const TimeGrid& grid,
                                                           const FixedPointOptions& opts,
                                                           const AdjointProvider& adjoint) {
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw StructuralError("fixed point: damping must lie in (0, 1]");
  }
  for (const auto& m : problem.members) {
    if (!m.action_set().free()) {
      throw StructuralError("fixed point: member '" + m.name + "' has a bounded action set");
    }
  }
  const ContinuousModel model(problem, grid);
  const Vector w = grid.trapezoid_weights();
  const double gamma = opts.damping;

  SolveReport report;
  StrategyProfile u = default_profile(model);
  double last_gap = kInfinity;
  int growing = 0;
  report.termination = "iteration cap";
  try {
    report.cost_history.push_back(model.cost(u));
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      const Trajectory x = model.state(u);
      const Trajectory psi = adjoint(u, x);
      const auto subspaces = build_subspaces(model, x);
      const StrategyProfile update = gnf_strategy_update(gnf, grid, x, psi, u, subspaces);

      StrategyProfile next = u;
      double gap_sq = 0.0;
      for (int i = 0; i < u.size(); ++i) {
        const auto& sub = subspaces[static_cast<std::size_t>(i)];
        auto& m = next.members[static_cast<std::size_t>(i)];
        const auto& target = update.members[static_cast<std::size_t>(i)];
        if (sub.is_identity()) {
          m.control.values() = (1.0 - gamma) * u.control(i).values() + gamma * target.control.values();
        } else {
          const Vector base = m.coefficients.size() == target.coefficients.size()
                                  ? m.coefficients
                                  : sub.coefficients(m.control);
          m.coefficients = (1.0 - gamma) * base + gamma * target.coefficients;
          m.control = sub.realize(m.coefficients);
        }
        Trajectory delta = m.control;
        delta.values() -= u.control(i).values();
        gap_sq += inner_product(delta, delta, w);
      }
      u = std::move(next);
      ++report.iterations;
      report.cost_history.push_back(model.cost(u));

      const double gap = std::sqrt(gap_sq);
      if (gap <= opts.tol) {
        report.termination = "fixed point";
        report.converged = true;
        break;
      }
      growing = gap > last_gap ? growing + 1 : 0;
      last_gap = gap;
      if (growing >= opts.divergence_window) {
        report.diverged = true;
        report.termination = "diverged: iterate gap grew for " +
                             std::to_string(opts.divergence_window) +
                             " consecutive iterations; try a smaller damping";
        break;
      }
    }
  } catch (const IntegrationError& e) {
    return {std::move(u), diverged_report(std::move(report), e)};
  } catch (const EvaluationError& e) {
    return {std::move(u), diverged_report(std::move(report), e)};
  }

  try {
    const auto stat = stationarity(model, u);
    report.cost = model.cost(u);
    report.residual = stat.rho;
    report.member_residuals = stat.member_rho;
  } catch (const IntegrationError& e) {
    return {std::move(u), diverged_report(std::move(report), e)};
  } catch (const EvaluationError& e) {
    return {std::move(u), diverged_report(std::move(report), e)};
  }
  return {std::move(u), std::move(report)};
}

std::pair<StrategyProfile, SolveReport> solve_gnf_fixed_point(
    const GnfData& gnf, const std::vector<DecisionMaker>& members, const TimeGrid& grid,
    const FixedPointOptions& opts) {
  const TeamProblem problem = to_team_problem(gnf, members);
  return damped_fixed_point(gnf, problem, grid, opts,
                            [&](const StrategyProfile& u, const Trajectory& x) {
                              return integrate_adjoint(problem, u, x, grid);
                            });
}

}  // namespace teamopt
