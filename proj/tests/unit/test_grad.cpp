#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nanode/grad.hpp"
#include "oracles.hpp"

using namespace nanode;

namespace {

// L(x_T) = Σ c_i x_i + ½ Σ x_i²
struct Quadratic {
  Vector c;
  double operator()(const Vector& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += c[i] * x[i] + 0.5 * x[i] * x[i];
    return s;
  }
  Vector grad(const Vector& x) const { return c + x; }
};

}  // namespace

TEST_CASE("discrete gradient of a scalar linear flow is exact") {
  // x_T = R(hθ)^L x0 with R the RK4 stability polynomial.
  const auto dyn = DynamicsFn::autonomous(1, 1, Activation::Identity);
  const double th = 0.6, x0 = 1.2;
  const std::vector<double> theta{th, 0.0};
  SolveSpec spec{Method::RK4, 0.0, 1.0, 5, true};
  const GradResult g = grad_discrete(dyn, Vector{x0}, theta, spec, Vector{1.0});
  const double h = 0.2, z = h * th;
  const double r = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
  const double dr = 1 + z + z * z / 2 + z * z * z / 6;
  CHECK(g.d_theta[0] == doctest::Approx(5 * std::pow(r, 4) * dr * h * x0).epsilon(1e-13));
  CHECK(g.d_x0[0] == doctest::Approx(std::pow(r, 5)).epsilon(1e-13));
  // Bias: ∂x_T/∂b through the same recursion, checked against differences.
  auto loss = [](const Vector& x) { return x[0]; };
  const GradResult fd = grad_fd(dyn, Vector{x0}, theta, spec, loss);
  CHECK(g.d_theta[1] == doctest::Approx(fd.d_theta[1]).epsilon(1e-8));
}

TEST_CASE("discrete gradients match finite differences across variants") {
  std::mt19937_64 rng(31);
  std::vector<DynamicsFn> dyns;
  dyns.push_back(DynamicsFn::autonomous(3, 2, Activation::Tanh));
  dyns.push_back(DynamicsFn::append_time(2, 1, Activation::Tanh));
  dyns.push_back(DynamicsFn::nanode(3, 1, BasisShape::bucketed(3), Activation::Tanh));
  dyns.push_back(DynamicsFn::nanode(2, 2, BasisShape::polynomial(3, PolyFamily::Chebyshev),
                                    Activation::Tanh));
  dyns.push_back(DynamicsFn::nanode(3, 1, BasisShape::random_feature(2, rng), Activation::Tanh));
  dyns.push_back(DynamicsFn::ortho_nanode(3, 1, BasisShape::trigonometric(1), Activation::Tanh));
  dyns.push_back(DynamicsFn::gated_mixture(2, 2, 1, BasisShape::trigonometric(2),
                                           Activation::Tanh));
  dyns.push_back(DynamicsFn::direct_hypernet(2, 1, Activation::Tanh));
  for (Method m : {Method::Euler, Method::RK4}) {
    for (const auto& dyn : dyns) {
      CAPTURE(to_string(dyn.variant()));
      const auto theta = oracle::random_params(dyn.param_count(), rng);
      const Vector x0 = oracle::random_vector(dyn.dim(), rng);
      const Quadratic loss{oracle::random_vector(dyn.dim(), rng)};
      SolveSpec spec{m, 0.0, 1.0, 9, true};
      const Trajectory tr = integrate(dyn, x0, theta, spec);
      const GradResult g = grad_discrete(dyn, x0, theta, spec, loss.grad(tr.terminal));
      const GradResult fd = grad_fd(dyn, x0, theta, spec, std::cref(loss));
      CHECK(relative_error(g.d_theta, fd.d_theta) < 1e-6);
      CHECK(relative_error(g.d_x0, fd.d_x0) < 1e-6);
      CHECK(g.activation_memory_units == 10);
    }
  }
}

TEST_CASE("adjoint converges to the discrete gradient") {
  std::mt19937_64 rng(32);
  const auto dyn = DynamicsFn::nanode(3, 1, BasisShape::trigonometric(2), Activation::Tanh);
  const auto theta = oracle::random_params(dyn.param_count(), rng);
  const Vector x0 = oracle::random_vector(3, rng);
  const Vector dl = oracle::random_vector(3, rng);
  double prev = 1.0;
  for (std::size_t L : {10, 20, 40}) {
    SolveSpec spec{Method::RK4, 0.0, 1.0, L, true};
    const GradResult d = grad_discrete(dyn, x0, theta, spec, dl);
    const GradResult a = grad_adjoint(dyn, x0, theta, spec, dl);
    const double e = relative_error(a.d_theta, d.d_theta);
    CHECK(e < prev);
    prev = e;
    CHECK(a.activation_memory_units == kAdjointMemoryUnits);
    CHECK(d.activation_memory_units == L + 1);
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("Euler adjoint") {
  std::mt19937_64 rng(33);
  const auto dyn = DynamicsFn::nanode(2, 1, BasisShape::polynomial(2, PolyFamily::Legendre),
                                      Activation::Tanh);
  const auto theta = oracle::random_params(dyn.param_count(), rng);
  const Vector x0 = oracle::random_vector(2, rng);
  const Vector dl{1.0, -0.5};
  SolveSpec spec{Method::Euler, 0.0, 1.0, 400, true};
  const GradResult d = grad_discrete(dyn, x0, theta, spec, dl);
  const GradResult a = grad_adjoint(dyn, x0, theta, spec, dl);
  CHECK(relative_error(a.d_theta, d.d_theta) < 1e-2);
  CHECK(relative_error(a.d_x0, d.d_x0) < 1e-2);
}

TEST_CASE("relative error") {
  CHECK(relative_error(Vector{1.0, 2.0}, Vector{1.0, 2.0}) == 0.0);
  CHECK(relative_error(Vector{1.1, 2.0}, Vector{1.0, 2.0}) == doctest::Approx(0.05));
  CHECK(relative_error(Vector{1e-13}, Vector{0.0}) == doctest::Approx(0.1));
  CHECK(parse_grad_method("adjoint") == GradMethod::Adjoint);
}
