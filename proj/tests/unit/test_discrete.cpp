#include <doctest.h>

#include <cmath>
#include <random>

#include "problems.hpp"

using namespace teamopt;
using testing_support::p1d;
using testing_support::scalar;

namespace {

DiscreteTeamProblem accumulate(int steps) {
  auto p = p1d(false);
  p.steps = steps;
  return p;
}

}  // namespace

TEST_CASE("discrete forward recursion") {
  const auto p = accumulate(3);
  const auto x = discrete_forward(p, discrete_constant_profile(p, {scalar(0.0)}));
  CHECK(x.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(x[k](0) == 1.0);

  auto q = accumulate(4);
  q.transition = [](int, const Vector& x, const Vector&) -> Vector { return 2.0 * x; };
  CHECK(discrete_forward(q, discrete_constant_profile(q, {scalar(0.0)}))[4](0) == 16.0);

  const auto r = p1d();
  CHECK(discrete_forward(r, discrete_constant_profile(r, {scalar(-0.5)}))[1](0) == 0.5);
}

TEST_CASE("discrete forward reports the offending step") {
  auto p = accumulate(5);
  p.transition = [](int k, const Vector& x, const Vector&) -> Vector {
    return k == 2 ? Vector::Constant(1, std::nan("")) : x;
  };
  try {
    discrete_forward(p, discrete_constant_profile(p, {scalar(0.0)}));
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.node() == 3);
  }
}

TEST_CASE("discrete adjoint recursion") {
  const auto p = p1d();
  const auto u = discrete_constant_profile(p, {scalar(-0.5)});
  const auto psi = discrete_adjoint(p, u, discrete_forward(p, u));
  CHECK(psi[1](0) == 0.5);
  CHECK(psi[0](0) == 0.5);

  auto q = accumulate(4);
  q.terminal_cost = [](const Vector& x) { return 3.0 * x(0); };
  const auto v = discrete_constant_profile(q, {scalar(0.2)});
  const auto psi_q = discrete_adjoint(q, v, discrete_forward(q, v));
  for (int k = 0; k <= 4; ++k) CHECK(psi_q[k](0) == doctest::Approx(3.0));

  q.terminal_cost = [](const Vector&) { return 0.0; };
  CHECK(discrete_adjoint(q, v, discrete_forward(q, v))[4](0) == 0.0);
}

TEST_CASE("discrete stationarity") {
  const auto p = p1d();
  CHECK(discrete_stationarity_residual(p, discrete_constant_profile(p, {scalar(-0.5)})).rho == 0.0);
  CHECK(discrete_stationarity_residual(p, discrete_constant_profile(p, {scalar(0.0)})).rho ==
        doctest::Approx(1.0));
  auto q = accumulate(3);
  q.transition = [](int, const Vector& x, const Vector&) -> Vector { return 0.5 * x; };
  q.running_cost = [](int, const Vector& x, const Vector&) { return x.squaredNorm(); };
  CHECK(discrete_stationarity_residual(q, discrete_constant_profile(q, {scalar(0.4)})).rho == 0.0);
}

TEST_CASE("one-step-ahead pairing") {
  const auto p = accumulate(3);
  const Vector x = scalar(0.4), u = scalar(0.1);
  const double h1 = discrete_hamiltonian(p, 1, x, scalar(1.0), u);
  const double h2 = discrete_hamiltonian(p, 1, x, scalar(2.0), u);
  CHECK(h2 - h1 == doctest::Approx(0.5));
}

TEST_CASE("discrete_solve_team") {
  SUBCASE("P1d") {
    const auto p = p1d();
    const auto [u, r] = discrete_solve_team(p, discrete_constant_profile(p, {scalar(0.0)}));
    CHECK(r.converged);
    CHECK(std::abs(u.control(0)[0](0) + 0.5) <= 1e-6);
    CHECK(std::abs(r.cost - 0.25) <= 1e-9);
  }
  SUBCASE("zero cost") {
    auto p = accumulate(4);
    p.running_cost = [](int, const Vector&, const Vector&) { return 0.0; };
    p.terminal_cost = [](const Vector&) { return 0.0; };
    const auto init = discrete_constant_profile(p, {scalar(0.7)});
    const auto [u, r] = discrete_solve_team(p, init);
    CHECK(u.control(0).values() == init.control(0).values());
    CHECK(r.residual == 0.0);
  }
  SUBCASE("Euler transcription approaches the continuous optimum") {
    const auto cont = testing_support::p1();
    const TimeGrid g(1.0, 200);
    const auto [uc, rc] = solve_team(cont, constant_profile(g, {scalar(0.0)}), g);
    const auto disc = euler_transcription(cont, 1000);
    const auto [ud, rd] = discrete_solve_team(disc, discrete_constant_profile(disc, {scalar(0.0)}));
    CHECK(rd.converged);
    CHECK(std::abs(rc.cost - rd.cost) <= 1e-3);
  }
}

TEST_CASE("discrete LQ gradient is exact") {
  std::mt19937_64 rng(17);
  DiscreteLQData lq;
  lq.state_dim = 2;
  lq.control_dims = {1, 1};
  lq.steps = 6;
  lq.x0 = testing_support::random_vector(rng, 2, 1.0);
  lq.A = testing_support::random_matrix(rng, 2, 2, 0.6);
  lq.B = testing_support::random_matrix(rng, 2, 2, 0.6);
  lq.H = testing_support::random_spd(rng, 2, 0.1);
  lq.R = testing_support::random_spd(rng, 2, 1.0);
  lq.M = testing_support::random_spd(rng, 2, 0.1);
  const auto p = to_discrete_problem(lq);
  auto u = discrete_constant_profile(p, {scalar(0.2), scalar(-0.1)});
  const auto sweep = DiscreteModel(p).sweep(u);
  const double eps = 1e-6;
  for (int k = 0; k < p.steps; ++k) {
    auto plus = u, minus = u;
    plus.members[1].control.values()(k, 0) += eps;
    minus.members[1].control.values()(k, 0) -= eps;
    const double fd = (discrete_cost(p, plus) - discrete_cost(p, minus)) / (2 * eps);
    CHECK(std::abs(fd - sweep.hamiltonian_grad[1][k](0)) <= 1e-8 * (1.0 + std::abs(fd)));
  }
}
