#include <benchmark/benchmark.h>

#include <random>

#include "nanode/ortho.hpp"

using namespace nanode;

namespace {

HouseholderChain random_chain(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(n * 131 + d);
  std::normal_distribution<double> normal(0.0, 1.0);
  HouseholderChain c;
  for (std::size_t k = 0; k < d; ++k) {
    Vector u(n);
    for (auto& v : u) v = normal(rng);
    c.vectors.push_back(std::move(u));
  }
  return c;
}

void BM_ChainApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const HouseholderChain c = random_chain(n, d);
  const Vector x(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(chain_apply(c, x));
  state.counters["flops"] = static_cast<double>(4 * n * d);
}
BENCHMARK(BM_ChainApply)->ArgsProduct({{16, 64, 256}, {4, 16, 64}});

void BM_DenseApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = chain_materialize(random_chain(n, n));
  const Vector x(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(dense_apply(m, x));
  state.counters["flops"] = static_cast<double>(2 * n * n);
}
BENCHMARK(BM_DenseApply)->Arg(16)->Arg(64)->Arg(256);

void BM_OrthoFieldEval(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const OrthoWrappedField f(n, BasisShape::polynomial(4, PolyFamily::Chebyshev));
  std::vector<double> p(f.param_count(), 0.3);
  for (std::size_t i = 0; i < p.size(); i += 3) p[i] = -0.7;
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.eval(p, t));
    t = t > 0.99 ? 0.0 : t + 0.01;
  }
}
BENCHMARK(BM_OrthoFieldEval)->Arg(8)->Arg(32);

}  // namespace
