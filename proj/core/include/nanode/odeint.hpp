#pragma once

// Fixed-step explicit integrators (Euler, classical RK4) on a uniform grid.
//
// Stage times are addressed by half-step indices: index s is the time
// t0 + s·h/2, so step k uses indices 2k (and 2k+1, 2k+2 for RK4). Forward and
// backward sweeps address the exact same times, and one materialized Slice per
// index serves every example in a batch.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nanode/dynamics.hpp"
#include "nanode/linalg.hpp"

namespace nanode {

enum class Method { Euler, RK4 };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// States whose norm exceeds this abort the solve.
inline constexpr double kDivergenceThreshold = 1e12;

struct SolveSpec {
  Method method = Method::RK4;
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t steps = 32;
  bool store_all = true;

  double step() const { return (t1 - t0) / static_cast<double>(steps); }
  void validate() const;
  /// Half-step index count, 2L + 1.
  std::size_t stage_count() const { return 2 * steps + 1; }
  double stage_time(std::size_t s) const;
  double grid_time(std::size_t k) const { return stage_time(2 * k); }
  std::size_t evals_per_step() const { return method == Method::Euler ? 1 : 4; }
};

struct Trajectory {
  std::vector<double> grid;    ///< L+1 grid times
  std::vector<Vector> states;  ///< every grid state, or only x0 and terminal
  Vector terminal;
  std::size_t eval_count = 0;
};

/// Slices at every stage time the method touches.
class SliceCache {
 public:
  SliceCache(const DynamicsFn& dyn, std::span<const double> theta, const SolveSpec& spec);

  const Slice& at(std::size_t stage) const;
  std::size_t size() const noexcept { return slices_.size(); }

 private:
  std::vector<std::optional<Slice>> slices_;
};

/// One explicit step of `method` from y with (signed) step h. `rhs(stage, y)`
/// returns dy/dt at the stage index; stages advance by `dir` (±1) per half step.
template <class Rhs>
Vector method_step(Method method, const Vector& y, double h, std::size_t stage, int dir,
                   Rhs&& rhs) {
  if (method == Method::Euler) {
    Vector out = y;
    out.axpy(h, rhs(stage, y));
    return out;
  }
  const std::size_t mid = stage + dir;
  const std::size_t end = stage + 2 * dir;
  const Vector k1 = rhs(stage, y);
  Vector y2 = y;
  y2.axpy(0.5 * h, k1);
  const Vector k2 = rhs(mid, y2);
  Vector y3 = y;
  y3.axpy(0.5 * h, k2);
  const Vector k3 = rhs(mid, y3);
  Vector y4 = y;
  y4.axpy(h, k3);
  const Vector k4 = rhs(end, y4);
  Vector out = y;
  out.axpy(h / 6.0, k1);
  out.axpy(h / 3.0, k2);
  out.axpy(h / 3.0, k3);
  out.axpy(h / 6.0, k4);
  return out;
}

/// Throws DivergenceError when y is non-finite or ‖y‖ > 1e12.
void check_divergence(const Vector& y, long step, double t);

Trajectory integrate(const DynamicsFn& dyn, const Vector& x0, std::span<const double> theta,
                     const SolveSpec& spec);
Trajectory integrate(const DynamicsFn& dyn, const SliceCache& cache, const Vector& x0,
                     const SolveSpec& spec);

/// Empirical order log2(e_L / e_2L) with errors measured against an
/// L = 4096 solution of the same method.
double convergence_order(const DynamicsFn& dyn, const Vector& x0,
                         std::span<const double> theta, Method method,
                         std::size_t base_steps = 16, double t0 = 0.0, double t1 = 1.0);

}  // namespace nanode
