#include <doctest.h>

#include <cmath>
#include <random>

#include "problems.hpp"

using namespace teamopt;
using testing_support::scalar;
using testing_support::vec;

namespace {

LQData scalar_lq(double a, double h, double M) {
  LQData lq;
  lq.state_dim = 1;
  lq.control_dims = {1};
  lq.x0 = scalar(1.0);
  lq.A = LQData::constant(Matrix::Constant(1, 1, a));
  lq.B = LQData::constant(Matrix::Identity(1, 1));
  lq.H = LQData::constant(Matrix::Constant(1, 1, h));
  lq.R = LQData::constant(Matrix::Identity(1, 1));
  lq.terminal_weight = Matrix::Constant(1, 1, M);
  return lq;
}

/// Two decoupled copies of P1 in LQ form.
LQData p1_pair_lq() {
  LQData lq;
  lq.state_dim = 2;
  lq.control_dims = {1, 1};
  lq.x0 = vec({1.0, 1.0});
  lq.B = LQData::constant(Matrix::Identity(2, 2));
  lq.R = LQData::constant(Matrix::Identity(2, 2));
  lq.terminal_weight = Matrix::Identity(2, 2);
  return lq;
}

}  // namespace

TEST_CASE("sigma closed forms") {
  const TimeGrid g(1.0, 100);
  const auto s1 = solve_sigma(scalar_lq(0.0, 0.0, 2.0), g);
  for (const auto& m : s1.values) CHECK(m(0, 0) == 2.0);
  const auto s2 = solve_sigma(scalar_lq(0.0, 1.0, 0.0), g);
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(s2.values[k](0, 0) - (1.0 - g.node(k))) < 1e-13);
  const auto s3 = solve_sigma(scalar_lq(0.7, 0.0, 1.0), g);
  for (int k = 0; k < g.size(); ++k)
    CHECK(std::abs(s3.values[k](0, 0) - std::exp(1.4 * (1.0 - g.node(k)))) < 1e-6);
}

TEST_CASE("sigma stays symmetric") {
  std::mt19937_64 rng(4);
  const auto lq = testing_support::random_lq(rng, 3, {1, 1});
  const auto s = solve_sigma(lq, TimeGrid(1.0, 200));
  CHECK(s.values.back() == lq.terminal_weight);
  for (const auto& m : s.values) CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("beta closed forms") {
  const TimeGrid g(1.0, 50);
  const auto lq0 = scalar_lq(0.0, 0.0, 1.0);
  const auto b0 = solve_beta(lq0, g, solve_sigma(lq0, g), constant_profile(g, {scalar(0.0)}));
  CHECK(max_norm(b0) == 0.0);
  const auto b1 = solve_beta(lq0, g, solve_sigma(lq0, g), constant_profile(g, {scalar(0.4)}));
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(b1[k](0) - 0.4 * (1.0 - g.node(k))) < 1e-13);
}

TEST_CASE("adjoint representation holds for arbitrary controls") {
  std::mt19937_64 rng(8);
  const TimeGrid g(1.0, 400);
  const auto lq = testing_support::random_lq(rng, 3, {1, 1});
  Trajectory a(g, 1), b(g, 1);
  for (int k = 0; k < g.size(); ++k) {
    a.set(k, scalar(std::sin(4 * g.node(k))));
    b.set(k, scalar(g.node(k) * g.node(k) - 0.3));
  }
  const auto u = open_loop_profile({a, b});
  const auto p = to_team_problem(lq, g);
  const auto x = integrate_forward(p, u, g);
  const auto psi = integrate_adjoint(p, u, x, g);
  const auto sigma = solve_sigma(lq, g);
  const AdjointRep rep{sigma, solve_beta(lq, g, sigma, u)};
  const auto rebuilt = rep.adjoint(x);
  CHECK((psi.values() - rebuilt.values()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("check_lq rejects indefinite weights") {
  const TimeGrid g(1.0, 10);
  auto lq = scalar_lq(0.0, 0.0, 1.0);
  lq.R = LQData::constant(Matrix::Constant(1, 1, -1.0));
  CHECK_THROWS_AS(check_lq(lq, g), StructuralError);
  auto lq2 = scalar_lq(0.0, -1.0, 1.0);
  CHECK_THROWS_AS(check_lq(lq2, g), StructuralError);
}

TEST_CASE("gnf strategy update") {
  const TimeGrid g(1.0, 10);
  GnfData gnf;
  gnf.state_dim = 1;
  gnf.control_dims = {1};
  gnf.x0 = scalar(0.0);
  gnf.drift = [](double, const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  gnf.input = [](double, const Vector&) -> Matrix { return Matrix::Identity(1, 1); };
  gnf.weight = [](double, const Vector&) -> Matrix { return Matrix::Identity(1, 1); };
  gnf.state_cost = [](double, const Vector&) { return 0.0; };
  gnf.linear = [](double, const Vector&) -> Vector { return Vector::Zero(1); };
  gnf.terminal_cost = [](const Vector&) { return 0.0; };
  const std::vector<InfoSubspace> open = {
      InfoSubspace::identity(g.nodes(), g.trapezoid_weights(), 1)};
  Trajectory x(g, 1);
  Trajectory psi(g, 1);
  psi.values().setConstant(2.0);
  auto u = gnf_strategy_update(gnf, g, x, psi, constant_profile(g, {scalar(0.0)}), open);
  CHECK((u.control(0).values().array() + 2.0).abs().maxCoeff() == 0.0);
  psi.values().setZero();
  u = gnf_strategy_update(gnf, g, x, psi, constant_profile(g, {scalar(0.0)}), open);
  CHECK(max_norm(u.control(0)) == 0.0);

  SUBCASE("block-diagonal weights decouple the members") {
    GnfData two = gnf;
    two.state_dim = 2;
    two.control_dims = {1, 1};
    two.input = [](double, const Vector&) -> Matrix { return Matrix::Identity(2, 2); };
    two.weight = [](double, const Vector&) -> Matrix { return vec({2.0, 4.0}).asDiagonal(); };
    two.linear = [](double, const Vector&) -> Vector { return vec({1.0, 0.0}); };
    const std::vector<InfoSubspace> open2 = {open[0], open[0]};
    Trajectory x2(g, 2), psi2(g, 2);
    psi2.values().col(0).setConstant(1.0);
    psi2.values().col(1).setConstant(-2.0);
    const auto v = gnf_strategy_update(two, g, x2, psi2,
                                       constant_profile(g, {scalar(5.0), scalar(5.0)}), open2);
    CHECK(v.control(0)[3](0) == doctest::Approx(-1.0));
    CHECK(v.control(1)[3](0) == doctest::Approx(0.5));
  }
  SUBCASE("singular weight names the member") {
    GnfData bad = gnf;
    bad.weight = [](double, const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
    CHECK_THROWS_AS(gnf_strategy_update(bad, g, x, psi, constant_profile(g, {scalar(0.0)}), open),
                    SingularityError);
  }
}

TEST_CASE("decentralized fixed point") {
  const TimeGrid g(1.0, 200);
  SUBCASE("decoupled pair") {
    const auto sol = solve_decentralized_lq(p1_pair_lq(), {}, g);
    CHECK(sol.report.converged);
    for (int i = 0; i < 2; ++i)
      CHECK((sol.profile.control(i).values().array() + 0.5).abs().maxCoeff() <= 1e-4);
    CHECK(sol.report.cost == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("zero data gives zero control") {
    auto lq = p1_pair_lq();
    lq.x0 = Vector::Zero(2);
    lq.A = LQData::constant(Matrix::Constant(2, 2, 0.3));
    const auto sol = solve_decentralized_lq(lq, {}, g);
    CHECK(sol.report.converged);
    CHECK(max_norm(sol.profile.control(0)) == 0.0);
    CHECK(max_norm(sol.profile.control(1)) == 0.0);
  }
  SUBCASE("coupled dynamics agree with solve_team") {
    std::mt19937_64 rng(21);
    auto lq = testing_support::random_lq(rng, 2, {1, 1});
    lq.R = LQData::constant(vec({1.5, 0.8}).asDiagonal());
    FixedPointOptions fp;
    fp.tol = 1e-9;
    const auto sol = solve_decentralized_lq(lq, {}, g, fp);
    CHECK(sol.report.converged);
    CHECK(sol.report.residual <= 10 * 1e-5);
    const auto p = to_team_problem(lq, g);
    const auto [u, r] = solve_team(p, constant_profile(g, {scalar(0.0), scalar(0.0)}), g);
    CHECK(std::abs(r.cost - sol.report.cost) <= 1e-4);
    const Vector w = g.trapezoid_weights();
    for (int i = 0; i < 2; ++i) {
      Trajectory d(g, 1);
      d.values() = u.control(i).values() - sol.profile.control(i).values();
      CHECK(l2_norm(d, w) <= 1e-3);
    }
  }
  SUBCASE("divergence is reported") {
    auto lq = p1_pair_lq();
    lq.R = LQData::constant(Matrix::Identity(2, 2) * 1e-3);
    lq.terminal_weight = Matrix::Identity(2, 2) * 10.0;
    FixedPointOptions fp;
    fp.damping = 1.0;
    fp.max_iterations = 300;
    const auto sol = solve_decentralized_lq(lq, {}, g, fp);
    CHECK_FALSE(sol.report.converged);
    CHECK(sol.report.diverged);
  }
}
