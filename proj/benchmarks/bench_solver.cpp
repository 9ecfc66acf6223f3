#include <benchmark/benchmark.h>

#include <random>

#include "nanode/grad.hpp"
#include "nanode/odeint.hpp"

using namespace nanode;

namespace {

struct Problem {
  DynamicsFn dyn;
  std::vector<double> theta;
  Vector x0;
};

Problem make_problem(std::size_t n) {
  Problem p{DynamicsFn::nanode(n, 1, BasisShape::trigonometric(4, 6.283185307179586),
                               Activation::Tanh),
            {}, Vector(n, 0.5)};
  std::mt19937_64 rng(n);
  p.theta.resize(p.dyn.param_count());
  p.dyn.initialize(p.theta, InitSpec{InitMode::FanIn, 1.0}, rng);
  return p;
}

void BM_Integrate(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const SolveSpec spec{Method::RK4, 0.0, 1.0, static_cast<std::size_t>(state.range(1)), false};
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p.dyn, p.x0, p.theta, spec));
}
BENCHMARK(BM_Integrate)->ArgsProduct({{4, 16}, {32, 128}});

void BM_GradDiscrete(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const SolveSpec spec{Method::RK4, 0.0, 1.0, static_cast<std::size_t>(state.range(1)), true};
  const Vector dl(p.x0.dim(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(grad_discrete(p.dyn, p.x0, p.theta, spec, dl));
}
BENCHMARK(BM_GradDiscrete)->ArgsProduct({{4, 16}, {32, 128}});

void BM_GradAdjoint(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const SolveSpec spec{Method::RK4, 0.0, 1.0, static_cast<std::size_t>(state.range(1)), true};
  const Vector dl(p.x0.dim(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(grad_adjoint(p.dyn, p.x0, p.theta, spec, dl));
}
BENCHMARK(BM_GradAdjoint)->ArgsProduct({{4, 16}, {32, 128}});

}  // namespace
