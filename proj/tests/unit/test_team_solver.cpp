#include <doctest.h>

#include <cmath>
#include <random>

#include "problems.hpp"

using namespace teamopt;
using testing_support::p1;
using testing_support::scalar;
using testing_support::vec;

namespace {

double max_dev(const Trajectory& u, double value) {
  return (u.values().array() - value).abs().maxCoeff();
}

TeamProblem zero_cost_problem() {
  auto p = p1(false);
  p.running_cost = [](double, const Vector&, const Vector&) { return 0.0; };
  p.terminal_cost = [](const Vector&) { return 0.0; };
  return p;
}

}  // namespace

TEST_CASE("evaluate_cost on P1") {
  const TimeGrid g(1.0, 200);
  CHECK(std::abs(evaluate_cost(p1(), constant_profile(g, {scalar(-0.5)}), g) - 0.25) < 1e-6);
  CHECK(std::abs(evaluate_cost(p1(), constant_profile(g, {scalar(0.0)}), g) - 0.5) < 1e-9);
  CHECK(evaluate_cost(zero_cost_problem(), constant_profile(g, {scalar(3.0)}), g) == 0.0);
}

TEST_CASE("stationarity residual on P1") {
  const TimeGrid g(1.0, 200);
  CHECK(stationarity_residual(p1(), constant_profile(g, {scalar(-0.5)}), g).rho <= 1e-6);
  CHECK(std::abs(stationarity_residual(p1(), constant_profile(g, {scalar(0.0)}), g).rho - 1.0) <
        1e-6);
  auto p = p1(false);
  p.dynamics = [](double, const Vector& x, const Vector&) -> Vector { return -x; };
  p.running_cost = [](double, const Vector& x, const Vector&) { return x.squaredNorm(); };
  CHECK(stationarity_residual(p, constant_profile(g, {scalar(0.7)}), g).rho == 0.0);
}

TEST_CASE("box violation at vertices") {
  const Box box = Box::uniform(1, -1.0, 1.0);
  // at the lower vertex a positive gradient is optimal
  CHECK(box_violation(scalar(2.0), scalar(-1.0), box) == 0.0);
  CHECK(box_violation(scalar(2.0), scalar(0.0), box) == doctest::Approx(2.0));
  CHECK(box_violation(scalar(-2.0), scalar(1.0), box) == 0.0);
  CHECK(box_violation(scalar(-0.5), scalar(0.0), Box::unbounded(1)) == doctest::Approx(0.5));
}

TEST_CASE("solve_team on P1") {
  const TimeGrid g(1.0, 200);
  SolverOptions opts;
  const auto [u, report] = solve_team(p1(), constant_profile(g, {scalar(0.0)}), g, opts);
  CHECK(report.converged);
  CHECK(report.iterations <= 200);
  CHECK(std::abs(report.cost - 0.25) <= 1e-5);
  CHECK(max_dev(u.control(0), -0.5) <= 1e-3);
  CHECK(report.residual <= opts.tol);
  for (std::size_t i = 1; i < report.cost_history.size(); ++i)
    CHECK(report.cost_history[i] <= report.cost_history[i - 1] + 1e-12);
  CHECK(report.has_certificate);
  CHECK(report.certificate.holds);
}

TEST_CASE("decoupled pair equals two independent solves") {
  const TimeGrid g(1.0, 100);
  const auto [u, report] = solve_team(testing_support::p1_pair(),
                                      constant_profile(g, {scalar(0.0), scalar(0.0)}), g);
  const auto [single, single_report] = solve_team(p1(), constant_profile(g, {scalar(0.0)}), g);
  CHECK(report.converged);
  CHECK(max_dev(u.control(0), -0.5) <= 1e-3);
  CHECK(max_dev(u.control(1), -0.5) <= 1e-3);
  CHECK(std::abs(report.cost - 2.0 * single_report.cost) <= 1e-6);
}

TEST_CASE("zero-cost problem returns the initial profile") {
  const TimeGrid g(1.0, 50);
  const auto init = constant_profile(g, {scalar(0.3)});
  const auto [u, report] = solve_team(zero_cost_problem(), init, g);
  CHECK(report.residual == 0.0);
  CHECK(report.converged);
  CHECK(u.control(0).values() == init.control(0).values());
}

TEST_CASE("box constraints are active at the solution") {
  auto p = p1();
  p.members[0].box = Box::uniform(1, -0.2, 0.2);
  const TimeGrid g(1.0, 100);
  const auto [u, report] = solve_team(p, constant_profile(g, {scalar(0.0)}), g);
  CHECK(report.converged);
  CHECK(max_dev(u.control(0), -0.2) <= 1e-9);
  CHECK(report.cost == doctest::Approx(0.5 * 0.04 + 0.5 * 0.64).epsilon(1e-6));
}

TEST_CASE("constant-basis member on P1") {
  auto p = p1();
  p.members[0].info = InfoSpec::polynomial(0);
  const TimeGrid g(1.0, 100);
  const auto [u, report] = solve_team(p, constant_profile(g, {scalar(0.0)}), g);
  CHECK(report.converged);
  REQUIRE(u.members[0].coefficients.size() == 1);
  CHECK(u.members[0].coefficients(0) == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("adjoint gradient matches central differences") {
  std::mt19937_64 rng(5);
  const auto p = testing_support::random_nonlinear(rng, 2, {1, 1});
  const TimeGrid g(1.0, 200);
  Trajectory a(g, 1), b(g, 1), da(g, 1), db(g, 1);
  for (int k = 0; k < g.size(); ++k) {
    const double t = g.node(k);
    a.set(k, scalar(0.3 * std::sin(2 * t)));
    b.set(k, scalar(-0.2 + 0.1 * t));
    da.set(k, scalar(std::cos(t)));
    db.set(k, scalar(1.0 - t * t));
  }
  const auto u = open_loop_profile({a, b});
  const auto du = open_loop_profile({da, db});
  const double eps = 1e-5;
  const double fd = (evaluate_cost(p, axpy(u, eps, du), g) - evaluate_cost(p, axpy(u, -eps, du), g)) /
                    (2 * eps);
  const double adj = adjoint_directional_derivative(p, u, du, g);
  CHECK(std::abs(fd - adj) <= 1e-4 * (1.0 + std::abs(adj)));
}

TEST_CASE("solve_pbp") {
  const TimeGrid g(1.0, 200);
  SUBCASE("single member matches solve_team") {
    const auto [a, ra] = solve_team(p1(), constant_profile(g, {scalar(0.0)}), g);
    const auto [b, rb] = solve_pbp(p1(), constant_profile(g, {scalar(0.0)}), g);
    CHECK(rb.converged);
    CHECK(std::abs(ra.cost - rb.cost) <= 1e-8);
    CHECK((a.control(0).values() - b.control(0).values()).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("decoupled blocks settle in one cycle") {
    const auto [u, r] = solve_pbp(testing_support::p1_pair(),
                                  constant_profile(g, {scalar(0.0), scalar(0.0)}), g);
    CHECK(r.converged);
    REQUIRE_FALSE(r.cycle_steps.empty());
    // the cycle after the first only confirms stationarity
    CHECK(r.cycle_steps.size() <= 2);
    if (r.cycle_steps.size() == 2) CHECK(r.cycle_steps[1] == 0);
    CHECK(max_dev(u.control(0), -0.5) <= 1e-3);
    CHECK(max_dev(u.control(1), -0.5) <= 1e-3);
  }
  SUBCASE("coupled convex LQ agrees with solve_team") {
    std::mt19937_64 rng(9);
    const auto lq = testing_support::random_lq(rng, 2, {1, 1});
    const auto p = to_team_problem(lq, g);
    const auto init = constant_profile(g, {scalar(0.0), scalar(0.0)});
    const auto [a, ra] = solve_team(p, init, g);
    const auto [b, rb] = solve_pbp(p, init, g);
    CHECK(ra.converged);
    CHECK(rb.converged);
    CHECK(std::abs(ra.cost - rb.cost) <= 1e-4);
  }
}

TEST_CASE("sufficiency certificate") {
  const TimeGrid g(1.0, 100);
  SUBCASE("P1 holds") {
    const auto c = sufficiency_certificate(p1(), constant_profile(g, {scalar(-0.5)}), g, 16);
    CHECK(c.holds);
    CHECK(c.evidence.perturbations == 16);
    CHECK(c.evidence.min_cost_gap >= -1e-6);
  }
  SUBCASE("concave running cost fails") {
    auto p = p1(false);
    p.running_cost = [](double, const Vector&, const Vector& u) { return -0.5 * u.squaredNorm(); };
    const auto c = sufficiency_certificate(p, constant_profile(g, {scalar(0.0)}), g, 8);
    CHECK_FALSE(c.holds);
    CHECK_FALSE(c.evidence.hamiltonian_convex);
  }
  SUBCASE("LQ instances pass the convexity sampling") {
    std::mt19937_64 rng(2);
    const auto lq = testing_support::random_lq(rng, 3, {1, 2});
    const auto p = to_team_problem(lq, g);
    const auto c = sufficiency_certificate(
        p, constant_profile(g, {scalar(0.1), vec({0.0, -0.1})}), g, 4);
    CHECK(c.evidence.hamiltonian_convex);
    CHECK(c.evidence.terminal_convex);
  }
}

TEST_CASE("iterates stay admissible") {
  auto p = testing_support::p1_pair();
  p.members[0].info = InfoSpec::polynomial(1);
  p.members[0].box = Box::uniform(1, -0.3, 0.3);
  p.members[1].info = InfoSpec::markov();
  p.members[1].observe = observe_components({1});
  p.members[1].observation_dim = 1;
  const TimeGrid g(1.0, 100);
  const auto [u, r] = solve_team(p, constant_profile(g, {scalar(0.0), scalar(0.0)}), g);
  CHECK(r.converged);
  const ContinuousModel model(p, g);
  const auto subspaces = build_subspaces(model, model.state(u));
  for (int i = 0; i < 2; ++i) {
    const auto& c = u.control(i);
    CHECK((project(subspaces[static_cast<std::size_t>(i)], c).values() - c.values())
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
    for (int k = 0; k < c.size(); ++k) CHECK(p.members[static_cast<std::size_t>(i)].action_set().contains(c[k], 1e-12));
  }
}
