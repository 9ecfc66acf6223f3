#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "nanode/linalg.hpp"

namespace nanode {

enum class OptimKind { SGD, Adam };

std::string_view to_string(OptimKind k);
OptimKind parse_optim_kind(std::string_view name);

struct OptimState {
  OptimKind kind = OptimKind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  OptimState() = default;
  OptimState(OptimKind kind, double lr, std::size_t params);
};

/// Adam with bias correction. Throws DivergenceError on a non-finite gradient.
void adam_step(OptimState& opt, std::span<double> theta, const Vector& grad);
void sgd_step(OptimState& opt, std::span<double> theta, const Vector& grad);
void optimizer_step(OptimState& opt, std::span<double> theta, const Vector& grad);

}  // namespace nanode
