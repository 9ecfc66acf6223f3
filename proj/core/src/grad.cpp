#include "nanode/grad.hpp"

#include <algorithm>
#include <cmath>

namespace nanode {

std::string_view to_string(GradMethod m) {
  switch (m) {
    case GradMethod::Discrete: return "discrete";
    case GradMethod::Adjoint: return "adjoint";
    case GradMethod::FiniteDiff: return "finite_diff";
  }
  return "?";
}

GradMethod parse_grad_method(std::string_view name) {
  for (auto m : {GradMethod::Discrete, GradMethod::Adjoint, GradMethod::FiniteDiff})
    if (to_string(m) == name) return m;
  throw ContractViolation("unknown gradient method '" + std::string(name) + "'");
}

double relative_error(const Vector& a, const Vector& b, double floor) {
  NANODE_REQUIRE(a.dim() == b.dim(), "relative_error dimension mismatch");
  return max_abs_diff(a, b) / std::max(norm_inf(b), floor);
}

// ---------------------------------------------------------------- buffers

StageGradients::StageGradients(const SliceCache& cache)
    : cache_(&cache), grads_(cache.size()) {}

SliceGrad& StageGradients::at(std::size_t stage) {
  NANODE_REQUIRE(stage < grads_.size(), "stage index out of range");
  if (!grads_[stage]) grads_[stage].emplace(SliceGrad::zeros_like(cache_->at(stage)));
  return *grads_[stage];
}

StageGradients& StageGradients::operator+=(const StageGradients& o) {
  NANODE_REQUIRE(grads_.size() == o.grads_.size(), "stage gradient size mismatch");
  for (std::size_t s = 0; s < grads_.size(); ++s)
    if (o.grads_[s]) at(s) += *o.grads_[s];
  return *this;
}

void StageGradients::pullback(const DynamicsFn& dyn, std::span<const double> theta,
                              const SolveSpec& spec, std::span<double> dtheta) const {
  for (std::size_t s = 0; s < grads_.size(); ++s)
    if (grads_[s]) dyn.pullback(theta, spec.stage_time(s), *grads_[s], dtheta);
}

// ---------------------------------------------------------------- discrete

Vector backprop_discrete(const DynamicsFn& dyn, const SliceCache& cache,
                         const std::vector<Vector>& states, const SolveSpec& spec,
                         const Vector& dl_dxt, StageGradients& acc) {
  NANODE_REQUIRE(states.size() == spec.steps + 1,
                 "discrete backprop needs every grid state (store_all)");
  NANODE_REQUIRE(dl_dxt.dim() == dyn.dim(), "terminal co-vector dimension mismatch");
  const double h = spec.step();
  Vector abar = dl_dxt;

  for (std::size_t k = spec.steps; k-- > 0;) {
    const Vector& x = states[k];
    const std::size_t s0 = 2 * k;
    if (spec.method == Method::Euler) {
      // x' = x + h f(x)
      Vector dx = dyn.vjp(cache.at(s0), x, abar, h, acc.at(s0));
      abar.axpy(h, dx);
      continue;
    }
    // Recompute the stage inputs of this step.
    const Slice& sa = cache.at(s0);
    const Slice& sb = cache.at(s0 + 1);
    const Slice& sc = cache.at(s0 + 2);
    const Vector& y1 = x;
    const Vector k1 = dyn.eval(sa, y1);
    Vector y2 = x;
    y2.axpy(0.5 * h, k1);
    const Vector k2 = dyn.eval(sb, y2);
    Vector y3 = x;
    y3.axpy(0.5 * h, k2);
    const Vector k3 = dyn.eval(sb, y3);
    Vector y4 = x;
    y4.axpy(h, k3);

    // x' = x + h/6 (k1 + 2k2 + 2k3 + k4)
    const Vector k4bar = (h / 6.0) * abar;
    Vector k3bar = (h / 3.0) * abar;
    Vector k2bar = (h / 3.0) * abar;
    Vector k1bar = (h / 6.0) * abar;
    Vector xbar = abar;

    const Vector y4bar = dyn.vjp(sc, y4, k4bar, 1.0, acc.at(s0 + 2));
    xbar += y4bar;
    k3bar.axpy(h, y4bar);
    const Vector y3bar = dyn.vjp(sb, y3, k3bar, 1.0, acc.at(s0 + 1));
    xbar += y3bar;
    k2bar.axpy(0.5 * h, y3bar);
    const Vector y2bar = dyn.vjp(sb, y2, k2bar, 1.0, acc.at(s0 + 1));
    xbar += y2bar;
    k1bar.axpy(0.5 * h, y2bar);
    xbar += dyn.vjp(sa, y1, k1bar, 1.0, acc.at(s0));
    abar = std::move(xbar);
  }
  return abar;
}

GradResult grad_discrete(const DynamicsFn& dyn, const Vector& x0,
                         std::span<const double> theta, const SolveSpec& spec,
                         const Vector& dl_dxt) {
  SolveSpec fwd = spec;
  fwd.store_all = true;
  const SliceCache cache(dyn, theta, fwd);
  const Trajectory tr = integrate(dyn, cache, x0, fwd);
  StageGradients acc(cache);
  GradResult out;
  out.method = GradMethod::Discrete;
  out.d_x0 = backprop_discrete(dyn, cache, tr.states, fwd, dl_dxt, acc);
  out.d_theta = Vector(dyn.param_count());
  acc.pullback(dyn, theta, fwd, out.d_theta.span());
  out.activation_memory_units = tr.states.size();
  return out;
}

// ---------------------------------------------------------------- adjoint

Vector backprop_adjoint(const DynamicsFn& dyn, const SliceCache& cache,
                        const Vector& terminal, const SolveSpec& spec, const Vector& dl_dxt,
                        StageGradients& acc) {
  NANODE_REQUIRE(terminal.dim() == dyn.dim() && dl_dxt.dim() == dyn.dim(),
                 "adjoint terminal dimension mismatch");
  const std::size_t n = dyn.dim();
  const double h = spec.step();

  // Augmented derivative [f(x); −(∂f/∂x)ᵀa]; ġ = −(∂f/∂θ)ᵀa is folded into
  // acc with the quadrature weight of the stage.
  auto stage = [&](std::size_t s, const Vector& x, const Vector& a, double weight,
                   Vector& fx, Vector& fa) {
    const Slice& sl = cache.at(s);
    fx = dyn.eval(sl, x);
    fa = dyn.vjp(sl, x, a, weight, acc.at(s));
    fa *= -1.0;
  };

  Vector x = terminal;
  Vector a = dl_dxt;
  Vector fx1(n), fa1(n), fx2(n), fa2(n), fx3(n), fa3(n), fx4(n), fa4(n);
  for (std::size_t k = spec.steps; k-- > 0;) {
    const std::size_t s = 2 * (k + 1);
    if (spec.method == Method::Euler) {
      stage(s, x, a, h, fx1, fa1);
      x.axpy(-h, fx1);
      a.axpy(-h, fa1);
    } else {
      stage(s, x, a, h / 6.0, fx1, fa1);
      Vector x2 = x, a2 = a;
      x2.axpy(-0.5 * h, fx1);
      a2.axpy(-0.5 * h, fa1);
      stage(s - 1, x2, a2, h / 3.0, fx2, fa2);
      Vector x3 = x, a3 = a;
      x3.axpy(-0.5 * h, fx2);
      a3.axpy(-0.5 * h, fa2);
      stage(s - 1, x3, a3, h / 3.0, fx3, fa3);
      Vector x4 = x, a4 = a;
      x4.axpy(-h, fx3);
      a4.axpy(-h, fa3);
      stage(s - 2, x4, a4, h / 6.0, fx4, fa4);
      x.axpy(-h / 6.0, fx1);
      x.axpy(-h / 3.0, fx2);
      x.axpy(-h / 3.0, fx3);
      x.axpy(-h / 6.0, fx4);
      a.axpy(-h / 6.0, fa1);
      a.axpy(-h / 3.0, fa2);
      a.axpy(-h / 3.0, fa3);
      a.axpy(-h / 6.0, fa4);
    }
    check_divergence(x, static_cast<long>(k), spec.grid_time(k));
    check_divergence(a, static_cast<long>(k), spec.grid_time(k));
  }
  return a;
}

GradResult grad_adjoint(const DynamicsFn& dyn, const Vector& x0,
                        std::span<const double> theta, const SolveSpec& spec,
                        const Vector& dl_dxt) {
  SolveSpec fwd = spec;
  fwd.store_all = false;
  const SliceCache cache(dyn, theta, fwd);
  const Trajectory tr = integrate(dyn, cache, x0, fwd);
  StageGradients acc(cache);
  GradResult out;
  out.method = GradMethod::Adjoint;
  out.d_x0 = backprop_adjoint(dyn, cache, tr.terminal, fwd, dl_dxt, acc);
  out.d_theta = Vector(dyn.param_count());
  acc.pullback(dyn, theta, fwd, out.d_theta.span());
  out.activation_memory_units = kAdjointMemoryUnits;
  return out;
}

// ---------------------------------------------------------------- finite diff

GradResult grad_fd(const DynamicsFn& dyn, const Vector& x0, std::span<const double> theta,
                   const SolveSpec& spec, const TerminalLoss& loss, double rel_step) {
  SolveSpec fwd = spec;
  fwd.store_all = false;
  std::vector<double> th(theta.begin(), theta.end());
  auto eval = [&](const Vector& x) { return loss(integrate(dyn, x, th, fwd).terminal); };

  GradResult out;
  out.method = GradMethod::FiniteDiff;
  out.d_theta = Vector(theta.size());
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double orig = th[i];
    const double step = rel_step * std::max(1.0, std::abs(orig));
    th[i] = orig + step;
    const double up = eval(x0);
    th[i] = orig - step;
    const double down = eval(x0);
    th[i] = orig;
    out.d_theta[i] = (up - down) / (2.0 * step);
  }
  out.d_x0 = Vector(x0.dim());
  Vector x = x0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double orig = x[i];
    const double step = rel_step * std::max(1.0, std::abs(orig));
    x[i] = orig + step;
    const double up = eval(x);
    x[i] = orig - step;
    const double down = eval(x);
    x[i] = orig;
    out.d_x0[i] = (up - down) / (2.0 * step);
  }
  out.activation_memory_units = 1;
  return out;
}

}  // namespace nanode
