#include <doctest.h>

#include <cmath>

#include "problems.hpp"

using namespace teamopt;
using testing_support::p1;
using testing_support::scalar;

namespace {

TeamProblem growth_problem() {
  auto p = p1(false);
  p.dynamics = [](double, const Vector& x, const Vector&) -> Vector { return x; };
  p.running_cost = [](double, const Vector&, const Vector&) { return 0.0; };
  p.terminal_cost = [](const Vector& x) { return x.sum(); };
  return p;
}

}  // namespace

TEST_CASE("forward RK4 on x' = x") {
  const auto p = growth_problem();
  const TimeGrid g(1.0, 100);
  const auto x = integrate_forward(p, constant_profile(g, {scalar(3.0)}), g);
  CHECK(x[0](0) == 1.0);
  CHECK(std::abs(x[100](0) - std::exp(1.0)) < 1e-6);
}

TEST_CASE("forward sweep with zero field and unit control") {
  auto p = p1();
  p.x0 = scalar(2.5);
  const TimeGrid g(1.0, 10);
  auto x = integrate_forward(p, constant_profile(g, {scalar(0.0)}), g);
  for (int k = 0; k < g.size(); ++k) CHECK(x[k](0) == 2.5);
  p.x0 = scalar(0.0);
  x = integrate_forward(p, constant_profile(g, {scalar(1.0)}), g);
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(x[k](0) - g.node(k)) < 1e-14);
}

TEST_CASE("forward sweep reports blow-up") {
  auto p = p1(false);
  p.dynamics = [](double, const Vector& x, const Vector&) -> Vector {
    return x.array().square().matrix() * 1e3;
  };
  const TimeGrid g(1.0, 20);
  CHECK_THROWS_AS(integrate_forward(p, constant_profile(g, {scalar(0.0)}), g), IntegrationError);
}

TEST_CASE("RK4 refinement order") {
  auto p = p1(false);
  p.dynamics = [](double t, const Vector& x, const Vector&) -> Vector {
    return -x * (1.0 + std::sin(t));
  };
  const double exact = std::exp(-(1.0 + 1.0 - std::cos(1.0)));
  auto err = [&](int K) {
    const TimeGrid g(1.0, K);
    return std::abs(integrate_forward(p, constant_profile(g, {scalar(0.0)}), g)[K](0) - exact);
  };
  const double ratio = err(10) / err(20);
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("adjoint sweeps") {
  SUBCASE("psi' = -psi gives e at t = 0") {
    const auto p = growth_problem();
    const TimeGrid g(1.0, 100);
    const auto u = constant_profile(g, {scalar(0.0)});
    const auto psi = integrate_adjoint(p, u, integrate_forward(p, u, g), g);
    CHECK(psi[100](0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(psi[0](0) - std::exp(1.0)) < 1e-6);
  }
  SUBCASE("constant adjoint") {
    auto p = p1();
    p.terminal_cost = [](const Vector& x) { return 3.0 * x(0); };
    p.terminal_cost_grad = [](const Vector&) -> Vector { return scalar(3.0); };
    const TimeGrid g(1.0, 10);
    const auto u = constant_profile(g, {scalar(0.2)});
    const auto psi = integrate_adjoint(p, u, integrate_forward(p, u, g), g);
    for (int k = 0; k < g.size(); ++k) CHECK(psi[k](0) == 3.0);
  }
  SUBCASE("P1 at the optimum") {
    const auto p = p1();
    const TimeGrid g(1.0, 200);
    const auto u = constant_profile(g, {scalar(-0.5)});
    const auto psi = integrate_adjoint(p, u, integrate_forward(p, u, g), g);
    for (int k = 0; k < g.size(); ++k) CHECK(std::abs(psi[k](0) - 0.5) < 1e-9);
  }
}

TEST_CASE("variational equation") {
  const auto p = p1();
  const TimeGrid g(1.0, 50);
  const auto u = constant_profile(g, {scalar(-0.3)});
  const auto x = integrate_forward(p, u, g);
  SUBCASE("unit direction") {
    const auto z = integrate_variational(p, u, constant_profile(g, {scalar(1.0)}), x, g);
    for (int k = 0; k < g.size(); ++k) CHECK(std::abs(z[k](0) - g.node(k)) < 1e-13);
  }
  SUBCASE("zero direction") {
    const auto z = integrate_variational(p, u, constant_profile(g, {scalar(0.0)}), x, g);
    CHECK(max_norm(z) == 0.0);
  }
  SUBCASE("matches the state difference quotient") {
    Trajectory dir(g, 1);
    for (int k = 0; k < g.size(); ++k) dir.set(k, scalar(std::cos(3.0 * g.node(k))));
    const auto du = open_loop_profile({dir});
    const double eps = 1e-3;
    const auto xe = integrate_forward(p, axpy(u, eps, du), g);
    const auto z = integrate_variational(p, u, du, x, g);
    double worst = 0.0;
    for (int k = 0; k < g.size(); ++k)
      worst = std::max(worst, std::abs((xe[k](0) - x[k](0)) / eps - z[k](0)));
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("continuous dependence on the control") {
  auto p = testing_support::p1(false);
  p.dynamics = [](double, const Vector& x, const Vector& u) -> Vector {
    return -x.array().sin().matrix() + u;
  };
  const TimeGrid g(1.0, 100);
  const auto u = constant_profile(g, {scalar(0.4)});
  const auto x = integrate_forward(p, u, g);
  double previous = 1e300;
  for (double a : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto xa = integrate_forward(p, axpy(u, a, constant_profile(g, {scalar(1.0)})), g);
    Trajectory diff(g, 1);
    for (int k = 0; k < g.size(); ++k) diff.set(k, xa[k] - x[k]);
    const double dev = max_norm(diff);
    CHECK(dev < previous);
    previous = dev;
  }
  CHECK(previous < 1e-3);
}
