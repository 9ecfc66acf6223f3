#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nanode/linalg.hpp"
#include "oracles.hpp"

using namespace nanode;

TEST_CASE("matrix product matches naive triple loop") {
  std::mt19937_64 rng(1);
  const Matrix a = oracle::random_matrix(5, 7, rng);
  const Matrix b = oracle::random_matrix(7, 3, rng);
  CHECK(max_abs_diff(a * b, oracle::naive_product(a, b)) < 1e-14);
  CHECK(max_abs_diff(a.transpose(), oracle::naive_transpose(a)) == 0.0);
}

TEST_CASE("matvec and transposed matvec") {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::random_matrix(4, 6, rng);
  const Vector x = oracle::random_vector(6, rng);
  const Vector y = oracle::random_vector(4, rng);
  CHECK(max_abs_diff(matvec(a, x), oracle::naive_matvec(a, x)) < 1e-14);
  CHECK(max_abs_diff(matvec_transposed(a, y), oracle::naive_matvec(a.transpose(), y)) < 1e-14);
  CHECK_THROWS_AS(matvec(a, y), ContractViolation);
}

TEST_CASE("rank one update") {
  Matrix a(2, 3);
  add_outer(a, 2.0, Vector{1, 2}, Vector{1, 0, -1});
  CHECK(a == Matrix{{2, 0, -2}, {4, 0, -4}});
}

TEST_CASE("vector helpers") {
  Vector v{3, -4};
  CHECK(norm2(v) == doctest::Approx(5.0));
  CHECK(norm_inf(v) == 4.0);
  CHECK(dot(v, Vector{1, 1}) == -1.0);
  v.axpy(2.0, Vector{1, 2});
  CHECK(v == Vector{5, 0});
  const double bad[] = {1.0, std::nan("")};
  CHECK_FALSE(all_finite(bad));
}

TEST_CASE("spectral norm of a 2x2 matches closed form") {
  // AᵀA = [[25, 20], [20, 25]] has eigenvalues 45 and 5.
  const Matrix a{{3, 0}, {4, 5}};
  CHECK(spectral_norm(a) == doctest::Approx(std::sqrt(45.0)).epsilon(1e-12));
  CHECK(spectral_norm(Matrix::identity(6)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(spectral_norm(Matrix(3, 3)) == 0.0);
}

TEST_CASE("matrix exponential") {
  SUBCASE("diagonal") {
    const Matrix e = matexp(Matrix::diag(Vector{1.0, -2.0, 0.5}));
    CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(e(2, 2) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
    CHECK(e(0, 1) == 0.0);
  }
  SUBCASE("plane rotation") {
    const double th = 2.3;
    const Matrix e = matexp(Matrix{{0, th}, {-th, 0}});
    CHECK(max_abs_diff(e, Matrix{{std::cos(th), std::sin(th)}, {-std::sin(th), std::cos(th)}}) <
          1e-13);
  }
  SUBCASE("large norm inverse pair") {
    std::mt19937_64 rng(3);
    const Matrix a = oracle::random_matrix(5, 5, rng, 3.0);
    CHECK(max_abs_diff(matexp(a) * matexp(-1.0 * a), Matrix::identity(5)) < 1e-9);
  }
}

TEST_CASE("orthogonality defect") {
  CHECK(orthogonality_defect(Matrix::identity(4)) == 0.0);
  CHECK(orthogonality_defect(2.0 * Matrix::identity(2)) == doctest::Approx(std::sqrt(18.0)));
}
