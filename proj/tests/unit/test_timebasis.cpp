#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nanode/timebasis.hpp"
#include "oracles.hpp"

using namespace nanode;

namespace {

double eval_with(const BasisShape& s, std::vector<double> coeffs, double t) {
  return TimeBasis(s, Vector(std::move(coeffs))).eval(t);
}

}  // namespace

TEST_CASE("coefficient counts") {
  std::mt19937_64 rng(0);
  CHECK(BasisShape::constant().coeff_count() == 1);
  CHECK(BasisShape::bucketed(5).coeff_count() == 5);
  CHECK(BasisShape::polynomial(4, PolyFamily::Legendre).coeff_count() == 4);
  CHECK(BasisShape::trigonometric(3).coeff_count() == 7);
  CHECK(BasisShape::trigonometric(0).coeff_count() == 1);
  CHECK(BasisShape::random_feature(6, rng).coeff_count() == 6);
}

TEST_CASE("closed-form polynomial values") {
  std::vector<double> z(3);
  BasisShape::polynomial_features(PolyFamily::Monomial, 1.0, z);
  CHECK(z[0] * 1 + z[1] * 2 + z[2] * 3 == 6.0);
  BasisShape::polynomial_features(PolyFamily::Chebyshev, 0.5, z);
  CHECK(z[2] == doctest::Approx(-0.5));
  // Monomials on t ∈ [0, 1] directly.
  CHECK(eval_with(BasisShape::polynomial(3, PolyFamily::Monomial), {1, 2, 3}, 1.0) == 6.0);
  // Chebyshev maps t = 0.75 on [0, 1] to s = 0.5.
  CHECK(eval_with(BasisShape::polynomial(3, PolyFamily::Chebyshev), {0, 0, 1}, 0.75) ==
        doctest::Approx(-0.5));
}

TEST_CASE("recurrences match explicit coefficient tables") {
  for (double s = -1.0; s <= 1.0; s += 0.125) {
    std::vector<double> c(5), p(5), m(9);
    BasisShape::polynomial_features(PolyFamily::Chebyshev, s, c);
    BasisShape::polynomial_features(PolyFamily::Legendre, s, p);
    BasisShape::polynomial_features(PolyFamily::Monomial, s, m);
    CHECK(c[2] == doctest::Approx(2 * s * s - 1).epsilon(1e-12));
    CHECK(c[3] == doctest::Approx(4 * s * s * s - 3 * s).epsilon(1e-12));
    CHECK(c[4] == doctest::Approx(8 * std::pow(s, 4) - 8 * s * s + 1).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx((3 * s * s - 1) / 2).epsilon(1e-12));
    CHECK(p[3] == doctest::Approx((5 * s * s * s - 3 * s) / 2).epsilon(1e-12));
    CHECK(p[4] == doctest::Approx((35 * std::pow(s, 4) - 30 * s * s + 3) / 8).epsilon(1e-12));
    for (std::size_t n = 0; n < m.size(); ++n)
      CHECK(m[n] == doctest::Approx(std::pow(s, static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("bucket selection") {
  const BasisShape b = BasisShape::bucketed(4, 2.0);
  CHECK(b.bucket_index(0.0) == 0);
  CHECK(b.bucket_index(0.49) == 0);
  CHECK(b.bucket_index(0.5) == 1);
  CHECK(b.bucket_index(1.5) == 3);
  CHECK(b.bucket_index(2.0) == 3);
  CHECK(eval_with(b, {1, 2, 3, 4}, 1.2) == 3.0);
}

TEST_CASE("trigonometric layout") {
  const double w = 2.0;
  const BasisShape s = BasisShape::trigonometric(2, w);
  const double t = 0.3;
  const double want = 0.5 + 1.0 * std::cos(w * t) - 2.0 * std::cos(2 * w * t) +
                      3.0 * std::sin(w * t) + 0.25 * std::sin(2 * w * t);
  CHECK(eval_with(s, {0.5, 1.0, -2.0, 3.0, 0.25}, t) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("random features with frozen draws") {
  const BasisShape s = BasisShape::random_feature(2, Vector{1.5, -0.5}, Vector{0.1, 2.0}, 3.0);
  const double t = 0.4;
  const double want = 2.0 * std::cos(3.0 * 1.5 * t + 0.1) - std::cos(3.0 * -0.5 * t + 2.0);
  CHECK(eval_with(s, {2.0, -1.0}, t) == doctest::Approx(want).epsilon(1e-14));
  std::mt19937_64 a(9), b(9);
  CHECK(BasisShape::random_feature(4, a).zeta() == BasisShape::random_feature(4, b).zeta());
}

TEST_CASE("time derivatives match central differences") {
  std::mt19937_64 rng(4);
  const std::vector<BasisShape> shapes = {
      BasisShape::polynomial(6, PolyFamily::Monomial, 2.0),
      BasisShape::polynomial(6, PolyFamily::Chebyshev, 2.0),
      BasisShape::polynomial(6, PolyFamily::Legendre, 2.0),
      BasisShape::trigonometric(3, 1.7, 2.0),
      BasisShape::random_feature(4, rng, 1.3, 2.0),
  };
  for (const auto& s : shapes) {
    const TimeBasis tb(s, oracle::random_vector(s.coeff_count(), rng));
    for (double t : {0.2, 0.9, 1.7}) {
      const double h = 1e-6;
      const double fd = (tb.eval(t + h) - tb.eval(t - h)) / (2 * h);
      CHECK(tb.time_derivative(t) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("coefficient gradient is the feature vector") {
  const BasisShape s = BasisShape::trigonometric(2);
  const TimeBasis tb(s, Vector(5, 1.0));
  const Vector g = tb.grad_coeffs(0.7, 3.0);
  const Vector z = s.features(0.7);
  for (std::size_t i = 0; i < 5; ++i) CHECK(g[i] == doctest::Approx(3.0 * z[i]));
}

TEST_CASE("penalty weights skip the time-independent component") {
  const BasisShape trig = BasisShape::trigonometric(2);
  CHECK(trig.penalty_weight(0, false) == 0.0);
  CHECK(trig.penalty_weight(1, false) == 1.0);
  CHECK(trig.penalty_weight(4, true) == 4.0);  // b₂ has frequency 2
  const BasisShape poly = BasisShape::polynomial(3, PolyFamily::Legendre);
  CHECK(poly.penalty_weight(0, true) == 0.0);
  CHECK(poly.penalty_weight(2, true) == 4.0);
  CHECK(BasisShape::bucketed(3).penalty_weight(2, false) == 0.0);
}

TEST_CASE("time outside the horizon is rejected") {
  const BasisShape s = BasisShape::trigonometric(1, 1.0, 2.0);
  CHECK_THROWS_AS(s.features(2.5), ContractViolation);
  CHECK_THROWS_AS(s.features(-0.1), ContractViolation);
  CHECK_NOTHROW(s.features(2.0));
}

TEST_CASE("parameter layout") {
  ParamLayout l;
  l.add("a", 3);
  l.add("b", 2);
  CHECK(l.total() == 5);
  CHECK(l.find("b").offset == 3);
  CHECK(l.valid());
  CHECK_THROWS(l.find("c"));
}
