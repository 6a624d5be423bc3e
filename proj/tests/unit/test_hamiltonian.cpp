#include <doctest.h>

#include <random>

#include "problems.hpp"

using namespace teamopt;
using testing_support::p1;
using testing_support::scalar;

TEST_CASE("Hamiltonian of P1") {
  const auto h = eval_hamiltonian(p1(), 0.0, scalar(1.0), scalar(0.5), scalar(-0.5));
  CHECK(h.value == doctest::Approx(-0.125));
  CHECK(std::abs(h.grad_u(0)) < 1e-15);
  CHECK(h.grad_x(0) == 0.0);
}

TEST_CASE("zero adjoint and running cost give a zero Hamiltonian") {
  auto p = p1(false);
  p.dynamics = [](double t, const Vector& x, const Vector& u) -> Vector {
    return x.array().sin().matrix() * t + u.array().square().matrix();
  };
  p.running_cost = [](double, const Vector&, const Vector&) { return 0.0; };
  const auto h = eval_hamiltonian(p, 0.3, scalar(0.7), scalar(0.0), scalar(-1.2));
  CHECK(h.value == 0.0);
  CHECK(h.grad_x.norm() == 0.0);
  CHECK(h.grad_u.norm() == 0.0);
}

TEST_CASE("GNF Hamiltonian gradient") {
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
  const auto p = to_team_problem(gnf);
  const auto h = eval_hamiltonian(p, 0.0, scalar(0.3), scalar(2.0), scalar(0.0));
  CHECK(h.grad_u(0) == doctest::Approx(2.0));
}

TEST_CASE("analytic and finite-difference derivatives agree") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Matrix A = testing_support::random_matrix(rng, 2, 2, 1.0);
  auto analytic = p1();
  analytic.state_dim = 2;
  analytic.x0 = Vector::Zero(2);
  analytic.dynamics = [A](double t, const Vector& x, const Vector& u) -> Vector {
    Vector out = A * x.array().sin().matrix();
    out(0) += std::cos(t) * u(0) * u(0);
    return out;
  };
  analytic.dynamics_jac_x = [A](double, const Vector& x, const Vector&) -> Matrix {
    return A * x.array().cos().matrix().asDiagonal();
  };
  analytic.dynamics_jac_u = [](double t, const Vector&, const Vector& u) -> Matrix {
    Matrix m = Matrix::Zero(2, 1);
    m(0, 0) = 2.0 * std::cos(t) * u(0);
    return m;
  };
  analytic.running_cost = [](double, const Vector& x, const Vector& u) {
    return std::exp(0.3 * x(0)) * u(0) * u(0) + x(1) * x(1);
  };
  analytic.running_cost_grad_x = [](double, const Vector& x, const Vector& u) -> Vector {
    return testing_support::vec({0.3 * std::exp(0.3 * x(0)) * u(0) * u(0), 2.0 * x(1)});
  };
  analytic.running_cost_grad_u = [](double, const Vector& x, const Vector& u) -> Vector {
    return scalar(2.0 * std::exp(0.3 * x(0)) * u(0));
  };
  auto numeric = analytic;
  numeric.dynamics_jac_x = nullptr;
  numeric.dynamics_jac_u = nullptr;
  numeric.running_cost_grad_x = nullptr;
  numeric.running_cost_grad_u = nullptr;
  for (int s = 0; s < 20; ++s) {
    const double t = 0.5 * (1.0 + uni(rng));
    const Vector x = testing_support::vec({uni(rng), uni(rng)});
    const Vector psi = testing_support::vec({uni(rng), uni(rng)});
    const Vector u = scalar(uni(rng));
    const auto a = eval_hamiltonian(analytic, t, x, psi, u);
    const auto n = eval_hamiltonian(numeric, t, x, psi, u);
    CHECK((a.grad_x - n.grad_x).norm() <= 1e-5 * (1.0 + a.grad_x.norm()));
    CHECK((a.grad_u - n.grad_u).norm() <= 1e-5 * (1.0 + a.grad_u.norm()));
  }
}

TEST_CASE("non-finite callback output is an evaluation error") {
  auto p = p1(false);
  p.running_cost = [](double, const Vector&, const Vector&) { return std::nan(""); };
  CHECK_THROWS_AS(eval_hamiltonian(p, 0.0, scalar(0.0), scalar(0.0), scalar(0.0)),
                  EvaluationError);
}

TEST_CASE("member blocks of H_u") {
  const auto p = testing_support::p1_pair();
  const auto h = eval_hamiltonian(p, 0.0, testing_support::vec({1.0, 1.0}),
                                  testing_support::vec({0.5, 0.25}),
                                  testing_support::vec({-0.5, 0.0}));
  CHECK(h.member_block(p, 0)(0) == doctest::Approx(0.0));
  CHECK(h.member_block(p, 1)(0) == doctest::Approx(0.25));
}
