#include "teamopt/lq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "teamopt/errors.hpp"

namespace teamopt {

int LQData::control_dim() const {
  int d = 0;
  for (int di : control_dims) d += di;
  return d;
}

int LQData::control_offset(int member) const {
  int offset = 0;
  for (int i = 0; i < member; ++i) offset += control_dims[static_cast<std::size_t>(i)];
  return offset;
}

MatrixFn LQData::constant(Matrix value) {
  return [value = std::move(value)](double) { return value; };
}

VectorFn LQData::constant_vector(Vector value) {
  return [value = std::move(value)](double) { return value; };
}

namespace {

Matrix sample(const MatrixFn& fn, double t, int rows, int cols, const char* name) {
  if (!fn) return Matrix::Zero(rows, cols);
  Matrix m = fn(t);
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "lq: coefficient " << name << " must be " << rows << "x" << cols << ", got "
       << m.rows() << "x" << m.cols();
    throw StructuralError(os.str());
  }
  if (!m.allFinite()) throw StructuralError(std::string("lq: coefficient ") + name + " is not finite");
  return m;
}

Vector sample(const VectorFn& fn, double t, int size, const char* name) {
  if (!fn) return Vector::Zero(size);
  Vector v = fn(t);
  if (v.size() != size) {
    throw StructuralError(std::string("lq: coefficient ") + name + " must have length " +
                          std::to_string(size) + ", got " + std::to_string(v.size()));
  }
  if (!v.allFinite()) throw StructuralError(std::string("lq: coefficient ") + name + " is not finite");
  return v;
}

double asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

void require_symmetric(const Matrix& m, const std::string& name) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if (asymmetry(m) > 1e-10 * scale) throw StructuralError("lq: " + name + " is not symmetric");
}

Matrix terminal_weight(const LQData& lq) {
  if (lq.terminal_weight.size() == 0) return Matrix::Zero(lq.state_dim, lq.state_dim);
  return lq.terminal_weight;
}

Vector terminal_linear(const LQData& lq) {
  if (lq.terminal_linear.size() == 0) return Vector::Zero(lq.state_dim);
  return lq.terminal_linear;
}

}  // namespace

LQTable::LQTable(const LQData& lq, const TimeGrid& grid) : grid_(grid) {
  const int n = lq.state_dim;
  const int d = lq.control_dim();
  if (n < 1 || d < 1) throw StructuralError("lq: state and control dimensions must be >= 1");
  nodes_.reserve(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    nodes_.push_back({sample(lq.A, t, n, n, "A"), sample(lq.B, t, n, d, "B"),
                      sample(lq.H, t, n, n, "H"), sample(lq.R, t, d, d, "R"),
                      sample(lq.E, t, d, n, "E"), sample(lq.b, t, n, "b"),
                      sample(lq.F, t, n, "F"), sample(lq.m, t, d, "m")});
  }
}

LQTable::Coefficients LQTable::at(double t) const {
  const double h = grid_.step();
  const int K = grid_.steps();
  int k = static_cast<int>(std::floor(t / h));
  k = std::clamp(k, 0, K - 1);
  const double s = std::clamp((t - grid_.node(k)) / h, 0.0, 1.0);
  if (s == 0.0) return node(k);
  if (s == 1.0) return node(k + 1);
  const auto& a = node(k);
  const auto& b = node(k + 1);
  auto mix = [s](const auto& lo, const auto& hi) { return ((1.0 - s) * lo + s * hi).eval(); };
  return {mix(a.A, b.A), mix(a.B, b.B), mix(a.H, b.H), mix(a.R, b.R),
          mix(a.E, b.E), mix(a.b, b.b), mix(a.F, b.F), mix(a.m, b.m)};
}

void check_lq(const LQData& lq, const TimeGrid& grid) {
  const int n = lq.state_dim;
  if (lq.control_dims.empty()) throw StructuralError("lq: no decision makers");
  for (int di : lq.control_dims) {
    if (di < 1) throw StructuralError("lq: control dimensions must be >= 1");
  }
  if (lq.x0.size() != n) throw StructuralError("lq: x0 must have length " + std::to_string(n));
  if (std::abs(grid.horizon() - lq.horizon) > 1e-12 * std::max(1.0, lq.horizon)) {
    throw StructuralError("lq: grid horizon does not match the problem horizon");
  }
  const LQTable table(lq, grid);
  for (int k = 0; k < grid.size(); ++k) {
    const auto& c = table.node(k);
    require_symmetric(c.R, "R");
    require_symmetric(c.H, "H");
    if (!(min_eigenvalue(c.R) > 0.0)) {
      throw StructuralError("lq: R is not positive definite at node " + std::to_string(k));
    }
    if (min_eigenvalue(c.H) < -1e-12 * (1.0 + c.H.cwiseAbs().maxCoeff())) {
      throw StructuralError("lq: H is not positive semidefinite at node " + std::to_string(k));
    }
  }
  const Matrix M = terminal_weight(lq);
  if (M.rows() != n || M.cols() != n) throw StructuralError("lq: M(T) must be n x n");
  if (terminal_linear(lq).size() != n) throw StructuralError("lq: N(T) must have length n");
  require_symmetric(M, "M(T)");
  if (min_eigenvalue(M) < -1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) {
    throw StructuralError("lq: M(T) is not positive semidefinite");
  }
}

TeamProblem to_team_problem(const LQData& lq, const TimeGrid& grid,
                            std::vector<DecisionMaker> members) {
  check_lq(lq, grid);
  auto table = std::make_shared<const LQTable>(lq, grid);
  const Matrix M = terminal_weight(lq);
  const Vector N = terminal_linear(lq);

  TeamProblem p;
  p.state_dim = lq.state_dim;
  p.horizon = lq.horizon;
  p.x0 = lq.x0;
  if (members.empty()) {
    for (std::size_t i = 0; i < lq.control_dims.size(); ++i) {
      DecisionMaker m;
      m.name = "dm" + std::to_string(i + 1);
      members.push_back(std::move(m));
    }
  }
  if (members.size() != lq.control_dims.size()) {
    throw StructuralError("lq: expected " + std::to_string(lq.control_dims.size()) +
                          " decision makers, got " + std::to_string(members.size()));
  }
  for (std::size_t i = 0; i < members.size(); ++i) members[i].control_dim = lq.control_dims[i];
  p.members = std::move(members);

  p.dynamics = [table](double t, const Vector& x, const Vector& u) -> Vector {
    const auto c = table->at(t);
    return c.A * x + c.b + c.B * u;
  };
  p.dynamics_jac_x = [table](double t, const Vector&, const Vector&) -> Matrix {
    return table->at(t).A;
  };
  p.dynamics_jac_u = [table](double t, const Vector&, const Vector&) -> Matrix {
    return table->at(t).B;
  };
  p.running_cost = [table](double t, const Vector& x, const Vector& u) {
    const auto c = table->at(t);
    return 0.5 * u.dot(c.R * u) + 0.5 * x.dot(c.H * x) + x.dot(c.F) + u.dot(c.E * x) + u.dot(c.m);
  };
  p.running_cost_grad_x = [table](double t, const Vector& x, const Vector& u) -> Vector {
    const auto c = table->at(t);
    return c.H * x + c.F + c.E.transpose() * u;
  };
  p.running_cost_grad_u = [table](double t, const Vector& x, const Vector& u) -> Vector {
    const auto c = table->at(t);
    return c.R * u + c.E * x + c.m;
  };
  p.terminal_cost = [M, N](const Vector& x) { return 0.5 * x.dot(M * x) + x.dot(N); };
  p.terminal_cost_grad = [M, N](const Vector& x) -> Vector { return M * x + N; };
  return p;
}

GnfData to_gnf(const LQData& lq, const TimeGrid& grid) {
  check_lq(lq, grid);
  auto table = std::make_shared<const LQTable>(lq, grid);
  const Matrix M = terminal_weight(lq);
  const Vector N = terminal_linear(lq);

  GnfData g;
  g.state_dim = lq.state_dim;
  g.control_dims = lq.control_dims;
  g.horizon = lq.horizon;
  g.x0 = lq.x0;
  g.drift = [table](double t, const Vector& x) -> Vector {
    const auto c = table->at(t);
    return c.A * x + c.b;
  };
  g.input = [table](double t, const Vector&) -> Matrix { return table->at(t).B; };
  g.weight = [table](double t, const Vector&) -> Matrix { return table->at(t).R; };
  g.state_cost = [table](double t, const Vector& x) {
    const auto c = table->at(t);
    return x.dot(c.H * x) + 2.0 * x.dot(c.F);
  };
  g.linear = [table](double t, const Vector& x) -> Vector {
    const auto c = table->at(t);
    return c.E * x + c.m;
  };
  g.dynamics_jac_x = [table](double t, const Vector&, const Vector&) -> Matrix {
    return table->at(t).A;
  };
  g.running_cost_grad_x = [table](double t, const Vector& x, const Vector& u) -> Vector {
    const auto c = table->at(t);
    return c.H * x + c.F + c.E.transpose() * u;
  };
  g.terminal_cost = [M, N](const Vector& x) { return 0.5 * x.dot(M * x) + x.dot(N); };
  g.terminal_cost_grad = [M, N](const Vector& x) -> Vector { return M * x + N; };
  return g;
}

Trajectory AdjointRep::adjoint(const Trajectory& x) const {
  if (x.size() != sigma.size() || x.size() != beta.size()) {
    throw StructuralError("adjoint representation: state is not on the Sigma grid");
  }
  Trajectory psi = beta;
  for (int k = 0; k < x.size(); ++k) {
    psi.set(k, sigma.values[static_cast<std::size_t>(k)] * x[k] + beta[k]);
  }
  return psi;
}

namespace {

Matrix sigma_rate(const LQTable::Coefficients& c, const Matrix& sigma) {
  return -(c.A.transpose() * sigma + sigma * c.A + c.H);
}

[[noreturn]] void diverged(const char* what, int node, const TimeGrid& grid) {
  throw IntegrationError(std::string(what) + " diverged at node " + std::to_string(node), node,
                         grid.node(node));
}

}  // namespace

MatrixTrajectory solve_sigma(const LQData& lq, const TimeGrid& grid) {
  check_lq(lq, grid);
  const LQTable table(lq, grid);
  const double h = grid.step();
  const int K = grid.steps();

  MatrixTrajectory out;
  out.times = grid.nodes();
  out.values.resize(static_cast<std::size_t>(grid.size()));
  Matrix sigma = terminal_weight(lq);
  out.values[static_cast<std::size_t>(K)] = sigma;
  for (int k = K - 1; k >= 0; --k) {
    const auto& c1 = table.node(k + 1);
    const auto cm = table.at(grid.node(k) + 0.5 * h);
    const auto& c0 = table.node(k);
    const Matrix k1 = sigma_rate(c1, sigma);
    const Matrix k2 = sigma_rate(cm, sigma - 0.5 * h * k1);
    const Matrix k3 = sigma_rate(cm, sigma - 0.5 * h * k2);
    const Matrix k4 = sigma_rate(c0, sigma - h * k3);
    sigma -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!sigma.allFinite()) diverged("Sigma sweep", k, grid);
    out.values[static_cast<std::size_t>(k)] = sigma;
  }
  return out;
}

Trajectory solve_beta(const LQData& lq, const TimeGrid& grid, const MatrixTrajectory& sigma,
                      const StrategyProfile& u) {
  check_lq(lq, grid);
  if (sigma.size() != grid.size()) throw StructuralError("lq: Sigma is not sampled on the grid");
  if (u.size() != static_cast<int>(lq.control_dims.size()) || u.nodes() != grid.size()) {
    throw StructuralError("lq: control profile does not match the problem grid");
  }
  const LQTable table(lq, grid);
  const double h = grid.step();
  const int K = grid.steps();

  auto rate = [](const LQTable::Coefficients& c, const Matrix& s, const Vector& beta,
                 const Vector& control) -> Vector {
    return -(c.A.transpose() * beta + s * c.b + c.F + s * c.B * control + c.E.transpose() * control);
  };

  Trajectory out(grid, lq.state_dim);
  Vector beta = terminal_linear(lq);
  out.set(K, beta);
  for (int k = K - 1; k >= 0; --k) {
    const auto& c1 = table.node(k + 1);
    const auto cm = table.at(grid.node(k) + 0.5 * h);
    const auto& c0 = table.node(k);
    const Matrix& s0 = sigma.values[static_cast<std::size_t>(k)];
    const Matrix& s1 = sigma.values[static_cast<std::size_t>(k + 1)];
    const Matrix sm = 0.5 * (s0 + s1) + (h / 8.0) * (sigma_rate(c0, s0) - sigma_rate(c1, s1));
    const Vector u0 = u.stacked(k);
    const Vector u1 = u.stacked(k + 1);
    const Vector um = u.stacked_midpoint(k);
    const Vector k1 = rate(c1, s1, beta, u1);
    const Vector k2 = rate(cm, sm, beta - 0.5 * h * k1, um);
    const Vector k3 = rate(cm, sm, beta - 0.5 * h * k2, um);
    const Vector k4 = rate(c0, s0, beta - h * k3, u0);
    beta -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!beta.allFinite()) diverged("beta sweep", k, grid);
    out.set(k, beta);
  }
  return out;
}

DecentralizedSolution solve_decentralized_lq(const LQData& lq,
                                             const std::vector<DecisionMaker>& members,
                                             const TimeGrid& grid,
                                             const FixedPointOptions& opts) {
  const TeamProblem problem = to_team_problem(lq, grid, members);
  const GnfData gnf = to_gnf(lq, grid);

  DecentralizedSolution out;
  out.adjoint.sigma = solve_sigma(lq, grid);
  const auto& sigma = out.adjoint.sigma;
  auto [profile, report] = damped_fixed_point(
      gnf, problem, grid, opts, [&](const StrategyProfile& u, const Trajectory& x) {
        AdjointRep rep{sigma, solve_beta(lq, grid, sigma, u)};
        return rep.adjoint(x);
      });
  if (!report.diverged) out.adjoint.beta = solve_beta(lq, grid, sigma, profile);
  out.profile = std::move(profile);
  out.report = std::move(report);
  return out;
}

}  // namespace teamopt
