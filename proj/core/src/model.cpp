#include "teamopt/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "teamopt/errors.hpp"

namespace teamopt {

namespace {

void expect_size(const std::string& callback, Eigen::Index expected, Eigen::Index actual) {
  if (expected != actual) {
    throw StructuralError(callback + " dimension: expected " + std::to_string(expected) +
                          ", got " + std::to_string(actual));
  }
}

void expect_shape(const std::string& callback, const Matrix& m, Eigen::Index rows,
                  Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << callback << " dimension: expected " << rows << "x" << cols << ", got " << m.rows()
       << "x" << m.cols();
    throw StructuralError(os.str());
  }
}

Vector sample_in_box(const Box& box, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector u(box.dim());
  for (int c = 0; c < box.dim(); ++c) {
    if (std::isfinite(box.lower[c]) && std::isfinite(box.upper[c])) {
      u[c] = std::uniform_real_distribution<double>(box.lower[c], box.upper[c])(rng);
    } else {
      u[c] = std::clamp(normal(rng), box.lower[c], box.upper[c]);
    }
  }
  return u;
}

Vector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

Box DecisionMaker::action_set() const {
  if (box.dim() == 0) return Box::unbounded(control_dim);
  return box;
}

Trajectory DecisionMaker::observations(const Trajectory& x) const {
  if (!observe) return x;
  const int k_dim = observation_dim > 0 ? observation_dim
                                        : static_cast<int>(observe(x.time(0), x).size());
  Matrix values(x.size(), k_dim);
  for (int k = 0; k < x.size(); ++k) {
    const Vector y = observe(x.time(k), x);
    expect_size("observation of member '" + name + "'", k_dim, y.size());
    values.row(k) = y.transpose();
  }
  const auto times = x.times();
  return {std::vector<double>(times.begin(), times.end()), std::move(values)};
}

ObservationFn observe_components(std::vector<int> indices) {
  return [indices = std::move(indices)](double t, const Trajectory& x) {
    const Vector state = x.at(t);
    Vector y(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) y[static_cast<Eigen::Index>(j)] = state[indices[j]];
    return y;
  };
}

int TeamProblem::control_dim() const {
  int d = 0;
  for (const auto& m : members) d += m.control_dim;
  return d;
}

int TeamProblem::control_offset(int member) const {
  int offset = 0;
  for (int i = 0; i < member; ++i) offset += members[static_cast<std::size_t>(i)].control_dim;
  return offset;
}

void TeamProblem::check_structure() const {
  if (state_dim < 1) throw StructuralError("problem: state dimension must be >= 1");
  if (!(horizon > 0.0)) throw StructuralError("problem: horizon must be positive");
  expect_size("initial state", state_dim, x0.size());
  if (members.empty()) throw StructuralError("problem: at least one decision maker required");
  for (const auto& m : members) {
    if (m.control_dim < 1) {
      throw StructuralError("problem: member '" + m.name + "' has control dimension < 1");
    }
    if (m.box.dim() != 0 && (m.box.lower.size() != m.control_dim ||
                             m.box.upper.size() != m.control_dim)) {
      throw StructuralError("problem: box of member '" + m.name + "' has wrong dimension");
    }
    if (m.info.kind != InfoKind::OpenLoop && m.info.kind != InfoKind::ClosedLoopMarkov &&
        m.info.features.empty()) {
      throw StructuralError("problem: member '" + m.name + "' declares an empty basis");
    }
  }
  if (!dynamics) throw StructuralError("problem: dynamics callback missing");
  if (!running_cost) throw StructuralError("problem: running cost callback missing");
  if (!terminal_cost) throw StructuralError("problem: terminal cost callback missing");
}

ValidationReport validate_problem(const TeamProblem& p, const ValidationOptions& opts) {
  p.check_structure();
  if (opts.samples < 1) throw StructuralError("validate: samples must be >= 1");

  ValidationReport report;
  auto flag = [&](std::string check, int member, std::string detail) {
    report.violations.push_back({std::move(check), member, std::move(detail)});
  };

  const int n = p.state_dim;
  const int d = p.control_dim();
  std::vector<Box> boxes;
  for (int i = 0; i < p.num_members(); ++i) {
    boxes.push_back(p.members[static_cast<std::size_t>(i)].action_set());
    if (!boxes.back().nonempty()) flag("action set", i, "lower bound exceeds upper bound");
  }
  if (!report.ok()) return report;

  std::mt19937_64 rng(opts.seed);
  auto sample_control = [&] {
    Vector u(d);
    for (int i = 0; i < p.num_members(); ++i) {
      u.segment(p.control_offset(i), p.members[static_cast<std::size_t>(i)].control_dim) =
          sample_in_box(boxes[static_cast<std::size_t>(i)], rng);
    }
    return u;
  };
  std::uniform_real_distribution<double> time_dist(0.0, p.horizon);

  for (int s = 0; s < opts.samples; ++s) {
    const double t = time_dist(rng);
    const Vector x = p.x0 + random_vector(n, rng);
    const Vector u = sample_control();

    const Vector fx = p.dynamics(t, x, u);
    expect_size("dynamics", n, fx.size());
    if (p.dynamics_jac_x) expect_shape("dynamics_jac_x", p.dynamics_jac_x(t, x, u), n, n);
    if (p.dynamics_jac_u) expect_shape("dynamics_jac_u", p.dynamics_jac_u(t, x, u), n, d);
    if (p.running_cost_grad_x) expect_size("running_cost_grad_x", n, p.running_cost_grad_x(t, x, u).size());
    if (p.running_cost_grad_u) expect_size("running_cost_grad_u", d, p.running_cost_grad_u(t, x, u).size());
    if (p.terminal_cost_grad) expect_size("terminal_cost_grad", n, p.terminal_cost_grad(x).size());

    if (!fx.allFinite()) {
      flag("dynamics finite", -1, "non-finite dynamics at t=" + std::to_string(t));
      continue;
    }
    if (!std::isfinite(p.running_cost(t, x, u))) {
      flag("running cost finite", -1, "non-finite running cost at t=" + std::to_string(t));
    }

    const double scale = 1e-3 * (1.0 + x.norm());
    Vector dx = random_vector(n, rng);
    dx *= scale / std::max(dx.norm(), 1e-300);
    const double ratio_x = (p.dynamics(t, x + dx, u) - fx).norm() / dx.norm();
    if (!(ratio_x <= opts.lipschitz_cap)) {
      flag("lipschitz x", -1, "ratio " + std::to_string(ratio_x) + " at t=" + std::to_string(t));
    }

    const Vector u2 = sample_control();
    if ((u2 - u).norm() > 0.0) {
      const double ratio_u = (p.dynamics(t, x, u2) - fx).norm() / (u2 - u).norm();
      if (!(ratio_u <= opts.lipschitz_cap)) {
        flag("lipschitz u", -1, "ratio " + std::to_string(ratio_u) + " at t=" + std::to_string(t));
      }
    }

    const double growth = fx.norm() / (1.0 + x.norm() + u.norm());
    if (!(growth <= opts.lipschitz_cap)) {
      flag("growth", -1, "ratio " + std::to_string(growth) + " at t=" + std::to_string(t));
    }
  }

  // Causality: two state paths that agree up to node j must give identical
  // observations at node j.
  const TimeGrid probe(p.horizon, std::max(2, opts.probe_steps));
  std::uniform_int_distribution<int> node_dist(0, probe.steps() - 1);
  for (int i = 0; i < p.num_members(); ++i) {
    const auto& member = p.members[static_cast<std::size_t>(i)];
    if (!member.observe) continue;
    Trajectory xa(probe, n);
    for (int k = 0; k < probe.size(); ++k) xa.set(k, p.x0 + random_vector(n, rng));
    bool causal = true;
    for (int s = 0; s < opts.samples && causal; ++s) {
      const int j = node_dist(rng);
      Trajectory xb = xa;
      for (int k = j + 1; k < probe.size(); ++k) xb.set(k, xa[k] + Vector::Ones(n) + random_vector(n, rng));
      const double t = probe.node(j);
      const Vector ya = member.observe(t, xa);
      const Vector yb = member.observe(t, xb);
      if (member.observation_dim > 0) expect_size("observation of member '" + member.name + "'", member.observation_dim, ya.size());
      if (ya.size() != yb.size() || (ya - yb).cwiseAbs().maxCoeff() != 0.0) {
        flag("causality", i, "observation at t=" + std::to_string(t) +
                                 " depends on the state after t");
        causal = false;
      }
    }
  }
  return report;
}

}  // namespace teamopt
