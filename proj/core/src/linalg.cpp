#include "nanode/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace nanode {

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

// ---------------------------------------------------------------- Vector

void Vector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Vector& Vector::operator+=(const Vector& o) {
  NANODE_REQUIRE(dim() == o.dim(), "vector dimension mismatch in +=");
  for (std::size_t i = 0; i < dim(); ++i) data_[i] += o.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& o) {
  NANODE_REQUIRE(dim() == o.dim(), "vector dimension mismatch in -=");
  for (std::size_t i = 0; i < dim(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vector& Vector::axpy(double s, const Vector& o) {
  NANODE_REQUIRE(dim() == o.dim(), "vector dimension mismatch in axpy");
  for (std::size_t i = 0; i < dim(); ++i) data_[i] += s * o.data_[i];
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector a) { return a *= s; }

double dot(const Vector& a, const Vector& b) {
  NANODE_REQUIRE(a.dim() == b.dim(), "vector dimension mismatch in dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    NANODE_REQUIRE(r.size() == cols_, "ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const Vector& d) {
  Matrix m(d.dim(), d.dim());
  for (std::size_t i = 0; i < d.dim(); ++i) m(i, i) = d[i];
  return m;
}

Vector Matrix::col(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  NANODE_REQUIRE(rows_ == o.rows_ && cols_ == o.cols_,
                 "matrix shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  NANODE_REQUIRE(rows_ == o.rows_ && cols_ == o.cols_,
                 "matrix shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix& Matrix::axpy(double s, const Matrix& o) {
  NANODE_REQUIRE(rows_ == o.rows_ && cols_ == o.cols_,
                 "matrix shape mismatch in axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  NANODE_REQUIRE(a.cols() == b.rows(), "matrix product dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
  NANODE_REQUIRE(a.cols() == x.dim(), "matvec dimension mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
  NANODE_REQUIRE(a.rows() == x.dim(), "matvec_transposed dimension mismatch");
  Vector y(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

void add_outer(Matrix& a, double s, const Vector& u, const Vector& v) {
  NANODE_REQUIRE(a.rows() == u.dim() && a.cols() == v.dim(),
                 "add_outer dimension mismatch");
  for (std::size_t i = 0; i < u.dim(); ++i) {
    const double su = s * u[i];
    auto r = a.row(i);
    for (std::size_t j = 0; j < v.dim(); ++j) r[j] += su * v[j];
  }
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.span()) s += v * v;
  return std::sqrt(s);
}

double orthogonality_defect(const Matrix& a) {
  Matrix g = a.transpose() * a;
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  NANODE_REQUIRE(a.rows() == b.rows() && a.cols() == b.cols(),
                 "max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.span().size(); ++i)
    m = std::max(m, std::abs(a.span()[i] - b.span()[i]));
  return m;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  NANODE_REQUIRE(a.dim() == b.dim(), "max_abs_diff dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------- matexp

namespace {

double one_norm(const Matrix& a) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

}  // namespace

Matrix matexp(const Matrix& a) {
  NANODE_REQUIRE(a.square(), "matexp requires a square matrix");
  const std::size_t n = a.rows();
  // The 1-norm bounds the 2-norm from above for the purpose of choosing s.
  int squarings = 0;
  double scaled = one_norm(a);
  while (scaled >= 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  const Matrix x = std::ldexp(1.0, -squarings) * a;

  // Taylor core; with ‖x‖ < 1/2 the remainder after 20 terms is < 1e-25.
  constexpr int kTerms = 20;
  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= kTerms; ++k) {
    term = (1.0 / k) * (term * x);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// ---------------------------------------------------------------- spectral

double spectral_norm(const Matrix& a) {
  NANODE_REQUIRE(a.rows() > 0 && a.cols() > 0, "spectral_norm of empty matrix");
  constexpr int kMaxIterations = 200;
  constexpr double kTolerance = 1e-10;

  const std::size_t n = a.cols();
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
  v *= 1.0 / norm2(v);

  double lambda = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    Vector w = matvec_transposed(a, matvec(a, v));
    const double next = dot(v, w);  // Rayleigh quotient of AᵀA
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;
    v = (1.0 / nw) * std::move(w);
    const bool converged =
        it > 0 && std::abs(next - lambda) <= kTolerance * std::abs(next);
    lambda = next;
    if (converged) break;
  }
  // One more Rayleigh quotient with the final iterate.
  const Vector av = matvec(a, v);
  return std::sqrt(std::max(dot(av, av), lambda));
}

}  // namespace nanode
