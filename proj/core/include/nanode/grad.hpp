#pragma once

// Loss gradients through a fixed-step solve:
//   grad_discrete  exact reverse-mode differentiation of the unrolled solver
//   grad_adjoint   continuous adjoint, integrating [x; a; g] backwards
//   grad_fd        central finite differences (independent oracle)
//
// The discrete and adjoint sweeps collect ∂/∂(W, b, σ) per stage time in a
// StageGradients buffer; parameters are reached with one pullback per stage,
// which lets a batch share the pullback cost.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nanode/dynamics.hpp"
#include "nanode/odeint.hpp"

namespace nanode {

enum class GradMethod { Discrete, Adjoint, FiniteDiff };

std::string_view to_string(GradMethod m);
GradMethod parse_grad_method(std::string_view name);

struct GradResult {
  Vector d_theta;
  Vector d_x0;
  GradMethod method = GradMethod::Discrete;
  /// Number of state-sized vectors held for the backward pass.
  std::size_t activation_memory_units = 0;
};

/// Slice gradients per half-step stage index.
class StageGradients {
 public:
  explicit StageGradients(const SliceCache& cache);

  SliceGrad& at(std::size_t stage);
  StageGradients& operator+=(const StageGradients& o);
  /// dθ += Σ_stages pullback(stage).
  void pullback(const DynamicsFn& dyn, std::span<const double> theta, const SolveSpec& spec,
                std::span<double> dtheta) const;

 private:
  const SliceCache* cache_;
  std::vector<std::optional<SliceGrad>> grads_;
};

/// Reverse sweep over stored grid states; returns ∂L/∂x0.
Vector backprop_discrete(const DynamicsFn& dyn, const SliceCache& cache,
                         const std::vector<Vector>& states, const SolveSpec& spec,
                         const Vector& dl_dxt, StageGradients& acc);

/// Backward augmented solve from the terminal state; returns a(t0).
Vector backprop_adjoint(const DynamicsFn& dyn, const SliceCache& cache,
                        const Vector& terminal, const SolveSpec& spec, const Vector& dl_dxt,
                        StageGradients& acc);

inline constexpr std::size_t kAdjointMemoryUnits = 3;  // x, a, g

GradResult grad_discrete(const DynamicsFn& dyn, const Vector& x0,
                         std::span<const double> theta, const SolveSpec& spec,
                         const Vector& dl_dxt);

GradResult grad_adjoint(const DynamicsFn& dyn, const Vector& x0,
                        std::span<const double> theta, const SolveSpec& spec,
                        const Vector& dl_dxt);

using TerminalLoss = std::function<double(const Vector&)>;

/// Central differences with step `rel_step`·max(1, |θ_i|) for every θ_i and
/// every coordinate of x0.
GradResult grad_fd(const DynamicsFn& dyn, const Vector& x0, std::span<const double> theta,
                   const SolveSpec& spec, const TerminalLoss& loss,
                   double rel_step = 1e-6);

/// max_i |a_i − b_i| / max(‖b‖_∞, floor): the relative error used by every
/// gradient comparison in the library.
double relative_error(const Vector& a, const Vector& b, double floor = 1e-12);

}  // namespace nanode
