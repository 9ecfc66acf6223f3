#include "nanode/odeint.hpp"

#include <cmath>

namespace nanode {

std::string_view to_string(Method m) { return m == Method::Euler ? "euler" : "rk4"; }

Method parse_method(std::string_view name) {
  if (name == "euler") return Method::Euler;
  if (name == "rk4") return Method::RK4;
  throw ContractViolation("unknown solver method '" + std::string(name) + "'");
}

void SolveSpec::validate() const {
  NANODE_REQUIRE(steps >= 1, "solver needs at least one step");
  NANODE_REQUIRE(std::isfinite(t0) && std::isfinite(t1) && t1 > t0,
                 "solver interval must satisfy t1 > t0");
  const double h = step();
  NANODE_REQUIRE(std::isfinite(h) && h > 0.0, "solver step size must be positive");
}

double SolveSpec::stage_time(std::size_t s) const {
  const std::size_t last = 2 * steps;
  NANODE_REQUIRE(s <= last, "stage index out of range");
  if (s == last) return t1;
  return t0 + (t1 - t0) * (static_cast<double>(s) / static_cast<double>(last));
}

void check_divergence(const Vector& y, long step, double t) {
  if (!all_finite(y.span())) throw DivergenceError("non-finite state", step, t);
  if (norm2(y) > kDivergenceThreshold)
    throw DivergenceError("state norm exceeded divergence threshold", step, t);
}

// ---------------------------------------------------------------- cache

SliceCache::SliceCache(const DynamicsFn& dyn, std::span<const double> theta,
                       const SolveSpec& spec) {
  spec.validate();
  slices_.resize(spec.stage_count());
  const std::size_t stride = spec.method == Method::Euler ? 2 : 1;
  for (std::size_t s = 0; s < slices_.size(); s += stride)
    slices_[s].emplace(dyn.slice(theta, spec.stage_time(s)));
}

const Slice& SliceCache::at(std::size_t stage) const {
  NANODE_REQUIRE(stage < slices_.size() && slices_[stage].has_value(),
                 "no slice materialized at this stage");
  return *slices_[stage];
}

// ---------------------------------------------------------------- integrate

Trajectory integrate(const DynamicsFn& dyn, const Vector& x0, std::span<const double> theta,
                     const SolveSpec& spec) {
  const SliceCache cache(dyn, theta, spec);
  return integrate(dyn, cache, x0, spec);
}

Trajectory integrate(const DynamicsFn& dyn, const SliceCache& cache, const Vector& x0,
                     const SolveSpec& spec) {
  spec.validate();
  NANODE_REQUIRE(x0.dim() == dyn.dim(), "initial state dimension mismatch");
  NANODE_REQUIRE(all_finite(x0.span()), "initial state must be finite");
  const double h = spec.step();

  Trajectory tr;
  tr.grid.reserve(spec.steps + 1);
  for (std::size_t k = 0; k <= spec.steps; ++k) tr.grid.push_back(spec.grid_time(k));
  if (spec.store_all) tr.states.reserve(spec.steps + 1);
  tr.states.push_back(x0);

  auto rhs = [&](std::size_t s, const Vector& y) { return dyn.eval(cache.at(s), y); };
  Vector x = x0;
  for (std::size_t k = 0; k < spec.steps; ++k) {
    x = method_step(spec.method, x, h, 2 * k, 1, rhs);
    check_divergence(x, static_cast<long>(k + 1), tr.grid[k + 1]);
    if (spec.store_all) tr.states.push_back(x);
  }
  if (!spec.store_all) tr.states.push_back(x);
  tr.terminal = std::move(x);
  tr.eval_count = spec.steps * spec.evals_per_step();
  return tr;
}

double convergence_order(const DynamicsFn& dyn, const Vector& x0,
                         std::span<const double> theta, Method method,
                         std::size_t base_steps, double t0, double t1) {
  auto solve = [&](std::size_t steps) {
    SolveSpec spec{method, t0, t1, steps, false};
    return integrate(dyn, x0, theta, spec).terminal;
  };
  const Vector reference = solve(4096);
  const double e1 = norm2(solve(base_steps) - reference);
  const double e2 = norm2(solve(2 * base_steps) - reference);
  return std::log2(e1 / e2);
}

}  // namespace nanode
