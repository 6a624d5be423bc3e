#include <benchmark/benchmark.h>

#include <random>

#include "problems.hpp"

using namespace teamopt;

namespace {

TeamProblem lq_instance(const TimeGrid& g) {
  std::mt19937_64 rng(7);
  return to_team_problem(testing_support::random_lq(rng, 4, {1, 2}), g);
}

StrategyProfile zero_profile(const TeamProblem& p, const TimeGrid& g) {
  return default_profile(ContinuousModel(p, g));
}

void BM_Forward(benchmark::State& state) {
  const TimeGrid g(1.0, static_cast<int>(state.range(0)));
  const auto p = lq_instance(g);
  const auto u = zero_profile(p, g);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_forward_with_cost(p, u, g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Forward)->RangeMultiplier(4)->Range(100, 6400)->Complexity(benchmark::oN);

void BM_Adjoint(benchmark::State& state) {
  const TimeGrid g(1.0, static_cast<int>(state.range(0)));
  const auto p = lq_instance(g);
  const auto u = zero_profile(p, g);
  const auto x = integrate_forward(p, u, g);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_adjoint(p, u, x, g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Adjoint)->RangeMultiplier(4)->Range(100, 6400)->Complexity(benchmark::oN);

void BM_Projection(benchmark::State& state) {
  const TimeGrid g(1.0, 400);
  const int degree = static_cast<int>(state.range(0));
  const auto s = build_subspace(InfoSpec::polynomial(degree), Trajectory(g, 1), g, 2);
  Trajectory path(g, 2);
  for (int k = 0; k < g.size(); ++k) {
    path.set(k, testing_support::vec({std::sin(7.0 * g.node(k)), g.node(k) * g.node(k)}));
  }
  for (auto _ : state) benchmark::DoNotOptimize(project(s, path));
}
BENCHMARK(BM_Projection)->DenseRange(0, 6, 2);

void BM_SolveP1(benchmark::State& state) {
  const auto p = testing_support::p1();
  const TimeGrid g(1.0, static_cast<int>(state.range(0)));
  const auto init = zero_profile(p, g);
  for (auto _ : state) benchmark::DoNotOptimize(solve_team(p, init, g));
}
BENCHMARK(BM_SolveP1)->Arg(100)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
