#include "nanode/optim.hpp"

#include <cmath>
#include <string>

namespace nanode {

std::string_view to_string(OptimKind k) { return k == OptimKind::Adam ? "adam" : "sgd"; }

OptimKind parse_optim_kind(std::string_view name) {
  if (name == "adam") return OptimKind::Adam;
  if (name == "sgd") return OptimKind::SGD;
  throw ContractViolation("unknown optimizer '" + std::string(name) + "'");
}

OptimState::OptimState(OptimKind k, double rate, std::size_t params)
    : kind(k), lr(rate), m(params, 0.0), v(params, 0.0) {}

namespace {

void check_gradient(const OptimState& opt, std::span<double> theta, const Vector& grad) {
  NANODE_REQUIRE(theta.size() == grad.dim(), "gradient length differs from parameters");
  for (std::size_t i = 0; i < grad.dim(); ++i)
    if (!std::isfinite(grad[i]))
      throw DivergenceError("non-finite gradient entry " + std::to_string(i),
                            static_cast<long>(opt.step + 1), 0.0);
}

}  // namespace

void adam_step(OptimState& opt, std::span<double> theta, const Vector& grad) {
  check_gradient(opt, theta, grad);
  if (opt.m.size() != theta.size()) {
    opt.m.assign(theta.size(), 0.0);
    opt.v.assign(theta.size(), 0.0);
  }
  ++opt.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * g;
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * g * g;
    const double mhat = opt.m[i] / c1;
    const double vhat = opt.v[i] / c2;
    theta[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

void sgd_step(OptimState& opt, std::span<double> theta, const Vector& grad) {
  check_gradient(opt, theta, grad);
  ++opt.step;
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= opt.lr * grad[i];
}

void optimizer_step(OptimState& opt, std::span<double> theta, const Vector& grad) {
  if (opt.kind == OptimKind::Adam)
    adam_step(opt, theta, grad);
  else
    sgd_step(opt, theta, grad);
}

}  // namespace nanode
