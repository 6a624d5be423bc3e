#include "teamopt/team_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "teamopt/errors.hpp"
#include "teamopt/hamiltonian.hpp"
#include "teamopt/integrate.hpp"

namespace teamopt {

// ---------------------------------------------------------------------------
// ContinuousModel

ContinuousModel::ContinuousModel(const TeamProblem& problem, const TimeGrid& grid)
    : problem_(&problem), grid_(grid), times_(grid.nodes()), weights_(grid.trapezoid_weights()) {
  problem.check_structure();
}

const DecisionMaker& ContinuousModel::member(int i) const {
  return problem_->members[static_cast<std::size_t>(i)];
}

Trajectory ContinuousModel::state(const StrategyProfile& u) const {
  return integrate_forward(*problem_, u, grid_);
}

namespace {

double terminal_cost_checked(const TeamProblem& p, const Vector& x) {
  const double terminal = p.terminal_cost(x);
  if (!std::isfinite(terminal)) throw EvaluationError("terminal cost is not finite");
  return terminal;
}

}  // namespace

double ContinuousModel::cost(const StrategyProfile& u) const {
  const ForwardSweep f = integrate_forward_with_cost(*problem_, u, grid_);
  return f.running_cost + terminal_cost_checked(*problem_, f.state[f.state.size() - 1]);
}

Sweep ContinuousModel::sweep(const StrategyProfile& u) const {
  Sweep s;
  ForwardSweep f = integrate_forward_with_cost(*problem_, u, grid_);
  s.state = std::move(f.state);
  s.cost = f.running_cost + terminal_cost_checked(*problem_, s.state[s.state.size() - 1]);
  s.adjoint = integrate_adjoint(*problem_, u, s.state, grid_);
  const int n_members = problem_->num_members();
  for (int i = 0; i < n_members; ++i) s.hamiltonian_grad.emplace_back(grid_, member(i).control_dim);
  for (int k = 0; k < grid_.size(); ++k) {
    const Vector hu = hamiltonian_grad_u(*problem_, grid_.node(k), s.state[k], s.adjoint[k], u.stacked(k));
    for (int i = 0; i < n_members; ++i) {
      s.hamiltonian_grad[static_cast<std::size_t>(i)].set(
          k, hu.segment(problem_->control_offset(i), member(i).control_dim));
    }
  }
  return s;
}

Trajectory ContinuousModel::observations(int i, const Trajectory& x) const {
  return member(i).observations(x);
}

double ContinuousModel::hamiltonian(int k, const Vector& x, const Vector& psi, const Vector& u) const {
  return hamiltonian_value(*problem_, grid_.node(k), x, psi, u);
}

Vector ContinuousModel::hamiltonian_adjoint(const Sweep& s, int k) const { return s.adjoint[k]; }

double ContinuousModel::terminal_cost(const Vector& x) const { return problem_->terminal_cost(x); }

// ---------------------------------------------------------------------------
// Shared machinery

namespace {

Box member_box(const SweepModel& model, int i) { return model.member(i).action_set(); }

bool any_observation_dependent(const SweepModel& model) {
  for (int i = 0; i < model.num_members(); ++i) {
    if (model.member(i).info.depends_on_observations()) return true;
  }
  return false;
}

void check_profile(const SweepModel& model, const StrategyProfile& u) {
  if (u.size() != model.num_members()) {
    throw StructuralError("profile has " + std::to_string(u.size()) + " members, problem has " +
                          std::to_string(model.num_members()));
  }
  const auto& times = model.control_times();
  for (int i = 0; i < u.size(); ++i) {
    const auto& c = u.control(i);
    if (c.dim() != model.member(i).control_dim || c.size() != static_cast<int>(times.size())) {
      throw StructuralError("control of member " + std::to_string(i) +
                            " does not match the control nodes");
    }
  }
}

// Re-realizes basis members from their coefficients on the given subspaces.
void realize_members(const SweepModel& model, const std::vector<InfoSubspace>& subspaces,
                     StrategyProfile& u) {
  for (int i = 0; i < u.size(); ++i) {
    const auto& s = subspaces[static_cast<std::size_t>(i)];
    auto& m = u.members[static_cast<std::size_t>(i)];
    if (s.is_identity()) continue;
    m.coefficients = s.project_feasible(m.coefficients, member_box(model, i));
    m.control = s.realize(m.coefficients);
  }
}

struct Iterate {
  StrategyProfile u;
  std::vector<InfoSubspace> subspaces;
  Sweep sweep;
  StationarityResult stat;
};

Iterate evaluate(const SweepModel& model, StrategyProfile u, std::vector<std::string>* warnings) {
  Iterate it;
  it.sweep = model.sweep(u);
  it.subspaces = build_subspaces(model, it.sweep.state);
  if (any_observation_dependent(model)) {
    realize_members(model, it.subspaces, u);
    it.sweep = model.sweep(u);
  }
  if (warnings != nullptr) {
    for (int i = 0; i < model.num_members(); ++i) {
      const auto& s = it.subspaces[static_cast<std::size_t>(i)];
      if (!s.is_identity() && s.rank_deficient()) {
        std::ostringstream os;
        os << "member " << i << ": Gram matrix rank-deficient (effective rank "
           << s.effective_rank() << " of " << s.basis_size() << ")";
        if (std::find(warnings->begin(), warnings->end(), os.str()) == warnings->end()) {
          warnings->push_back(os.str());
        }
      }
    }
  }
  it.stat = stationarity_from_sweep(model, u, it.sweep, it.subspaces);
  it.u = std::move(u);
  return it;
}

double active_residual(const StationarityResult& stat, const std::vector<bool>& active) {
  double rho = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) rho = std::max(rho, stat.member_rho[i]);
  }
  return rho;
}

// Projected gradient on the active members. Returns the number of accepted
// steps; appends accepted costs to the report history.
int descend(const SweepModel& model, Iterate& it, const std::vector<bool>& active,
            const SolverOptions& opts, int budget, SolveReport& report) {
  constexpr int kStallWindow = 25;
  double alpha = opts.initial_step;
  int steps = 0;
  int stalled = 0;
  double best = it.sweep.cost;
  const int n = model.num_members();
  const Vector& w = model.weights();
  while (true) {
    if (active_residual(it.stat, active) <= opts.tol) {
      report.termination = "stationary";
      return steps;
    }
    if (steps >= budget) {
      report.termination = "iteration cap";
      return steps;
    }

    std::vector<Vector> direction(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const auto& s = it.subspaces[static_cast<std::size_t>(i)];
      direction[static_cast<std::size_t>(i)] = -s.coefficients(it.sweep.hamiltonian_grad[static_cast<std::size_t>(i)]);
    }

    bool accepted = false;
    StrategyProfile trial;
    double predicted = 0.0, achieved = 0.0;
    for (int bt = 0; bt < opts.max_backtracks; ++bt, alpha *= opts.backtrack) {
      trial = it.u;
      double decrease = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        const auto& s = it.subspaces[static_cast<std::size_t>(i)];
        auto& m = trial.members[static_cast<std::size_t>(i)];
        const Box box = member_box(model, i);
        if (s.is_identity()) {
          const Vector flat = s.coefficients(m.control) + alpha * direction[static_cast<std::size_t>(i)];
          m.control = s.realize(s.project_feasible(flat, box));
        } else {
          m.coefficients = s.project_feasible(m.coefficients + alpha * direction[static_cast<std::size_t>(i)], box);
          m.control = s.realize(m.coefficients);
        }
        Trajectory delta = it.u.control(i);
        delta.values() -= m.control.values();
        decrease += inner_product(it.sweep.hamiltonian_grad[static_cast<std::size_t>(i)], delta, w);
      }
      if (!(decrease > 0.0)) continue;
      double cost = 0.0;
      try {
        cost = model.cost(trial);
      } catch (const Error&) {
        continue;
      }
      if (cost <= it.sweep.cost - opts.armijo_c * decrease) {
        accepted = true;
        predicted = decrease;
        achieved = it.sweep.cost - cost;
        break;
      }
    }
    if (!accepted) {
      report.termination = "line search stalled";
      return steps;
    }
    it = evaluate(model, std::move(trial), &report.warnings);
    ++steps;
    report.cost_history.push_back(it.sweep.cost);
    // Below the grid's resolution the cost stops moving before rho reaches tol.
    // Observation-dependent bases are re-realized after each step, so the
    // cost need not be monotone; compare against the best seen.
    if (best - it.sweep.cost > 1e-13 * (1.0 + std::abs(best))) {
      stalled = 0;
    } else {
      ++stalled;
    }
    best = std::min(best, it.sweep.cost);
    if (stalled >= kStallWindow) {
      report.termination = "cost stagnated above tolerance";
      return steps;
    }
    // Next trial step from the curvature seen along this one (exact for a
    // quadratic cost without active bounds); plain growth when none shows.
    const double curvature = predicted - achieved;
    if (curvature > 1e-14 * std::abs(predicted)) {
      alpha = std::clamp(alpha * predicted / (2.0 * curvature), alpha * opts.backtrack, 10.0 * alpha);
    } else {
      alpha /= opts.backtrack;
    }
    alpha = std::min(alpha, opts.max_step);
  }
}

void finish_report(const Iterate& it, const SolverOptions& opts, SolveReport& report) {
  report.cost = it.sweep.cost;
  report.residual = it.stat.rho;
  report.member_residuals = it.stat.member_rho;
  report.converged = it.stat.rho <= opts.tol;
}

}  // namespace

std::vector<InfoSubspace> build_subspaces(const SweepModel& model, const Trajectory& x) {
  std::vector<InfoSubspace> out;
  const auto& times = model.control_times();
  for (int i = 0; i < model.num_members(); ++i) {
    const auto& member = model.member(i);
    Trajectory y = member.info.depends_on_observations()
                       ? model.observations(i, x)
                       : Trajectory(times, Matrix(static_cast<Eigen::Index>(times.size()), 0));
    out.push_back(build_subspace(member.info, y, model.weights(), member.control_dim));
  }
  return out;
}

StrategyProfile make_admissible(const SweepModel& model, const StrategyProfile& u) {
  check_profile(model, u);
  std::vector<InfoSubspace> subspaces;
  bool needs_basis = false;
  for (int i = 0; i < model.num_members(); ++i) {
    needs_basis = needs_basis || model.member(i).info.kind != InfoKind::OpenLoop;
  }
  if (needs_basis) {
    subspaces = build_subspaces(model, any_observation_dependent(model)
                                           ? model.state(u)
                                           : Trajectory());
  }
  StrategyProfile out = u;
  for (int i = 0; i < out.size(); ++i) {
    auto& m = out.members[static_cast<std::size_t>(i)];
    const Box box = member_box(model, i);
    if (model.member(i).info.kind == InfoKind::OpenLoop) {
      m.coefficients.resize(0);
      for (int k = 0; k < m.control.size(); ++k) m.control.set(k, box.clip(m.control[k]));
      continue;
    }
    const auto& s = subspaces[static_cast<std::size_t>(i)];
    if (m.coefficients.size() != s.basis_size()) m.coefficients = s.coefficients(m.control);
    m.coefficients = s.project_feasible(m.coefficients, box);
    m.control = s.realize(m.coefficients);
  }
  return out;
}

StrategyProfile default_profile(const SweepModel& model) {
  const auto& times = model.control_times();
  std::vector<Trajectory> controls;
  for (int i = 0; i < model.num_members(); ++i) {
    controls.emplace_back(times, Matrix::Zero(static_cast<Eigen::Index>(times.size()),
                                              model.member(i).control_dim));
  }
  return make_admissible(model, open_loop_profile(std::move(controls)));
}

double box_violation(const Vector& r, const Vector& u, const Box& box) {
  double bounded = 0.0;
  double free_sq = 0.0;
  for (Eigen::Index c = 0; c < r.size(); ++c) {
    const double rc = r[c];
    if (rc > 0.0) {
      if (std::isfinite(box.lower[c])) bounded += std::max(0.0, rc * (u[c] - box.lower[c]));
      else free_sq += rc * rc;
    } else if (rc < 0.0) {
      if (std::isfinite(box.upper[c])) bounded += std::max(0.0, -rc * (box.upper[c] - u[c]));
      else free_sq += rc * rc;
    }
  }
  return bounded + std::sqrt(free_sq);
}

StationarityResult stationarity_from_sweep(const SweepModel& model, const StrategyProfile& u,
                                           const Sweep& sweep,
                                           const std::vector<InfoSubspace>& subspaces) {
  StationarityResult out;
  for (int i = 0; i < model.num_members(); ++i) {
    const auto& s = subspaces[static_cast<std::size_t>(i)];
    const Trajectory& g = sweep.hamiltonian_grad[static_cast<std::size_t>(i)];
    Trajectory r = s.project(g);
    const Box box = member_box(model, i);
    double rho = 0.0;
    if (s.is_identity() || box.free()) {
      for (int k = 0; k < r.size(); ++k) rho = std::max(rho, box_violation(r[k], u.control(i)[k], box));
    } else {
      // The box couples the nodes through the coefficients, so the pointwise
      // check does not apply; use the unit-step projected gradient mapping.
      const auto& m = u.members[static_cast<std::size_t>(i)];
      const Vector theta =
          m.coefficients.size() == s.basis_size() ? m.coefficients : s.coefficients(m.control);
      const Vector next = s.project_feasible(theta - s.coefficients(g), box);
      rho = max_norm(s.realize(theta - next));
    }
    out.member_rho.push_back(rho);
    out.rho = std::max(out.rho, rho);
    out.residuals.push_back(std::move(r));
  }
  return out;
}

StationarityResult stationarity(const SweepModel& model, const StrategyProfile& u) {
  check_profile(model, u);
  const Sweep s = model.sweep(u);
  return stationarity_from_sweep(model, u, s, build_subspaces(model, s.state));
}

std::vector<Vector> coefficient_gradient(const SweepModel& model, const Sweep& sweep,
                                         const std::vector<InfoSubspace>& subspaces) {
  std::vector<Vector> out;
  for (int i = 0; i < model.num_members(); ++i) {
    out.push_back(subspaces[static_cast<std::size_t>(i)].moments(
        sweep.hamiltonian_grad[static_cast<std::size_t>(i)]));
  }
  return out;
}

std::pair<StrategyProfile, SolveReport> projected_descent(const SweepModel& model,
                                                          const StrategyProfile& init,
                                                          const SolverOptions& opts) {
  SolveReport report;
  Iterate it = evaluate(model, make_admissible(model, init), &report.warnings);
  report.cost_history.push_back(it.sweep.cost);
  const std::vector<bool> all(static_cast<std::size_t>(model.num_members()), true);
  report.iterations = descend(model, it, all, opts, opts.max_iterations, report);
  finish_report(it, opts, report);
  return {std::move(it.u), std::move(report)};
}

std::pair<StrategyProfile, SolveReport> block_descent(const SweepModel& model,
                                                      const StrategyProfile& init,
                                                      const SolverOptions& opts) {
  SolveReport report;
  Iterate it = evaluate(model, make_admissible(model, init), &report.warnings);
  report.cost_history.push_back(it.sweep.cost);
  const int n = model.num_members();
  int total = 0;
  report.termination = "cycle cap";
  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    const double start = it.sweep.cost;
    const double start_rho = it.stat.rho;
    int steps = 0;
    for (int i = 0; i < n && total < opts.max_iterations; ++i) {
      std::vector<bool> active(static_cast<std::size_t>(n), false);
      active[static_cast<std::size_t>(i)] = true;
      SolveReport inner;
      const int taken = descend(model, it, active, opts, opts.max_iterations - total, inner);
      steps += taken;
      total += taken;
      report.cost_history.insert(report.cost_history.end(), inner.cost_history.begin(),
                                 inner.cost_history.end());
      for (auto& w : inner.warnings) {
        if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end()) {
          report.warnings.push_back(std::move(w));
        }
      }
    }
    report.cycle_steps.push_back(steps);
    if (start - it.sweep.cost < opts.cost_tol && it.stat.rho <= opts.tol) {
      report.termination = "stationary";
      break;
    }
    if (total >= opts.max_iterations) {
      report.termination = "iteration cap";
      break;
    }
    if (steps == 0) {
      report.termination = "no block improved";
      break;
    }
    if (start - it.sweep.cost <= 1e-13 * (1.0 + std::abs(start)) &&
        it.stat.rho > 0.99 * start_rho) {
      report.termination = "cost stagnated above tolerance";
      break;
    }
  }
  report.iterations = total;
  finish_report(it, opts, report);
  return {std::move(it.u), std::move(report)};
}

SufficiencyCertificate certify(const SweepModel& model, const StrategyProfile& u, int samples,
                               std::uint64_t seed) {
  check_profile(model, u);
  SufficiencyCertificate cert;
  auto& ev = cert.evidence;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto& times = model.control_times();
  const int nodes = static_cast<int>(times.size());
  const int n = model.state_dim();
  const int nm = model.num_members();

  const Sweep sweep = model.sweep(u);
  const auto subspaces = build_subspaces(model, sweep.state);

  auto random_vec = [&](int dim) {
    Vector v(dim);
    for (int j = 0; j < dim; ++j) v[j] = normal(rng);
    return v;
  };
  auto clip_stacked = [&](Vector v) {
    int offset = 0;
    for (int i = 0; i < nm; ++i) {
      const int d = model.member(i).control_dim;
      v.segment(offset, d) = member_box(model, i).clip(v.segment(offset, d));
      offset += d;
    }
    return v;
  };

  // Midpoint convexity of H(t_k, ., psi(t_k), .) and phi.
  const int convexity_samples = std::max(8, 4 * samples);
  std::uniform_int_distribution<int> node_dist(0, nodes - 1);
  ev.hamiltonian_convex = true;
  ev.terminal_convex = true;
  ev.worst_hamiltonian_gap = -kInfinity;
  ev.worst_terminal_gap = -kInfinity;
  for (int s = 0; s < convexity_samples; ++s) {
    const int k = node_dist(rng);
    const Vector psi = model.hamiltonian_adjoint(sweep, k);
    const Vector xk = sweep.state[k];
    const Vector uk = u.stacked(k);
    const double xs = 1.0 + xk.norm();
    const double us = 1.0 + uk.norm();
    const Vector xa = xk + xs * random_vec(n), xb = xk + xs * random_vec(n);
    const Vector ua = clip_stacked(uk + us * random_vec(static_cast<int>(uk.size())));
    const Vector ub = clip_stacked(uk + us * random_vec(static_cast<int>(uk.size())));
    const double ha = model.hamiltonian(k, xa, psi, ua);
    const double hb = model.hamiltonian(k, xb, psi, ub);
    const double hm = model.hamiltonian(k, 0.5 * (xa + xb), psi, 0.5 * (ua + ub));
    const double gap = hm - 0.5 * (ha + hb);
    ev.worst_hamiltonian_gap = std::max(ev.worst_hamiltonian_gap, gap);
    if (gap > 1e-9 * (1.0 + std::abs(ha) + std::abs(hb))) ev.hamiltonian_convex = false;

    const Vector xt = sweep.state[sweep.state.size() - 1];
    const double ts = 1.0 + xt.norm();
    const Vector pa = xt + ts * random_vec(n), pb = xt + ts * random_vec(n);
    const double fa = model.terminal_cost(pa), fb = model.terminal_cost(pb);
    const double tgap = model.terminal_cost(0.5 * (pa + pb)) - 0.5 * (fa + fb);
    ev.worst_terminal_gap = std::max(ev.worst_terminal_gap, tgap);
    if (tgap > 1e-9 * (1.0 + std::abs(fa) + std::abs(fb))) ev.terminal_convex = false;
    ++ev.convexity_samples;
  }

  // Direct cost comparison against random admissible perturbations.
  ev.perturbations_passed = true;
  ev.min_cost_gap = kInfinity;
  if (ev.hamiltonian_convex && ev.terminal_convex) {
    const double span = nodes > 1 ? times.back() - times.front() : 1.0;
    std::uniform_real_distribution<double> scale_dist(0.01, 1.0);
    for (int s = 0; s < samples; ++s) {
      StrategyProfile trial = u;
      const double scale = scale_dist(rng);
      for (int i = 0; i < nm; ++i) {
        const auto& sub = subspaces[static_cast<std::size_t>(i)];
        auto& m = trial.members[static_cast<std::size_t>(i)];
        const Box box = member_box(model, i);
        if (sub.is_identity()) {
          const int d = m.control.dim();
          Matrix coef(4, d);
          for (int j = 0; j < 4; ++j) coef.row(j) = random_vec(d).transpose() / (1.0 + j);
          for (int k = 0; k < nodes; ++k) {
            const double tau = (times[static_cast<std::size_t>(k)] - times.front()) / span;
            Vector v = m.control[k];
            for (int j = 0; j < 4; ++j) v += scale * std::cos(j * M_PI * tau) * coef.row(j).transpose();
            m.control.set(k, box.clip(v));
          }
        } else {
          const Vector step = random_vec(static_cast<int>(m.coefficients.size()));
          m.coefficients = sub.project_feasible(
              m.coefficients + scale * step / std::sqrt(static_cast<double>(step.size())), box);
          m.control = sub.realize(m.coefficients);
        }
      }
      const double gap = model.cost(trial) - sweep.cost;
      ev.min_cost_gap = std::min(ev.min_cost_gap, gap);
      ++ev.perturbations;
      if (gap < -1e-8 * (1.0 + std::abs(sweep.cost))) ev.perturbations_passed = false;
    }
  }
  if (ev.perturbations == 0) ev.min_cost_gap = 0.0;
  cert.holds = ev.hamiltonian_convex && ev.terminal_convex && ev.perturbations_passed;
  return cert;
}

// ---------------------------------------------------------------------------
// Continuous-time entry points

double evaluate_cost(const TeamProblem& p, const StrategyProfile& u, const TimeGrid& grid) {
  return ContinuousModel(p, grid).cost(u);
}

StationarityResult stationarity_residual(const TeamProblem& p, const StrategyProfile& u,
                                         const TimeGrid& grid) {
  return stationarity(ContinuousModel(p, grid), u);
}

double adjoint_directional_derivative(const TeamProblem& p, const StrategyProfile& u,
                                      const StrategyProfile& direction, const TimeGrid& grid) {
  const ContinuousModel model(p, grid);
  check_profile(model, direction);
  const Sweep s = model.sweep(u);
  double total = 0.0;
  for (int i = 0; i < p.num_members(); ++i) {
    total += inner_product(s.hamiltonian_grad[static_cast<std::size_t>(i)], direction.control(i),
                           model.weights());
  }
  return total;
}

namespace {

void attach_certificate(const SweepModel& model, const StrategyProfile& u,
                        const SolverOptions& opts, SolveReport& report) {
  if (!report.converged || opts.certificate_samples <= 0) return;
  report.certificate = certify(model, u, opts.certificate_samples, opts.seed);
  report.has_certificate = true;
}

}  // namespace

std::pair<StrategyProfile, SolveReport> solve_team(const TeamProblem& p,
                                                   const StrategyProfile& init,
                                                   const TimeGrid& grid,
                                                   const SolverOptions& opts) {
  const ContinuousModel model(p, grid);
  auto result = projected_descent(model, init, opts);
  attach_certificate(model, result.first, opts, result.second);
  return result;
}

std::pair<StrategyProfile, SolveReport> solve_pbp(const TeamProblem& p,
                                                  const StrategyProfile& init,
                                                  const TimeGrid& grid,
                                                  const SolverOptions& opts) {
  const ContinuousModel model(p, grid);
  auto result = block_descent(model, init, opts);
  attach_certificate(model, result.first, opts, result.second);
  return result;
}

SufficiencyCertificate sufficiency_certificate(const TeamProblem& p, const StrategyProfile& u,
                                               const TimeGrid& grid, int samples,
                                               std::uint64_t seed) {
  return certify(ContinuousModel(p, grid), u, samples, seed);
}

}  // namespace teamopt
