#include <cmath>

#include "nanode/dynamics.hpp"

namespace nanode {

namespace {

double draw(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  return dist(rng);
}

}  // namespace

// ---------------------------------------------------------------- per-entry

PerEntryField::PerEntryField(std::size_t rows, std::size_t cols, BasisShape shape,
                             bool bias)
    : rows_(rows), cols_(cols), shape_(std::move(shape)), bias_(bias) {
  NANODE_REQUIRE(rows > 0 && cols > 0, "weight field needs positive dimensions");
}

std::size_t PerEntryField::param_count() const {
  return (rows_ * cols_ + (bias_ ? rows_ : 0)) * shape_.coeff_count();
}

AffineSlice PerEntryField::materialize(std::span<const double> p, double t) const {
  NANODE_REQUIRE(p.size() == param_count(), "per-entry field parameter count");
  const std::size_t nc = shape_.coeff_count();
  const Vector z = shape_.features(t);
  AffineSlice out{Matrix(rows_, cols_), Vector(rows_)};
  const double* a = p.data();
  for (std::size_t e = 0; e < rows_ * cols_; ++e, a += nc) {
    double s = 0.0;
    for (std::size_t q = 0; q < nc; ++q) s += a[q] * z[q];
    out.w.data()[e] = s;
  }
  if (bias_) {
    for (std::size_t i = 0; i < rows_; ++i, a += nc) {
      double s = 0.0;
      for (std::size_t q = 0; q < nc; ++q) s += a[q] * z[q];
      out.b[i] = s;
    }
  }
  return out;
}

void PerEntryField::pullback(std::span<const double> p, double t, const Matrix& dw,
                             const Vector& db, std::span<double> dp) const {
  NANODE_REQUIRE(p.size() == param_count() && dp.size() == param_count(),
                 "per-entry field pullback length");
  const std::size_t nc = shape_.coeff_count();
  const Vector z = shape_.features(t);
  double* g = dp.data();
  for (std::size_t e = 0; e < rows_ * cols_; ++e, g += nc) {
    const double up = dw.data()[e];
    if (up == 0.0) continue;
    for (std::size_t q = 0; q < nc; ++q) g[q] += up * z[q];
  }
  if (bias_) {
    for (std::size_t i = 0; i < rows_; ++i, g += nc) {
      const double up = db[i];
      if (up == 0.0) continue;
      for (std::size_t q = 0; q < nc; ++q) g[q] += up * z[q];
    }
  }
}

Matrix PerEntryField::gamma(std::span<const double> p, double t) const {
  NANODE_REQUIRE(p.size() == param_count(), "per-entry field parameter count");
  const std::size_t nc = shape_.coeff_count();
  const Vector z = shape_.features(t);
  Matrix g(rows_ * cols_ + (bias_ ? rows_ : 0), param_count());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) {
      const std::size_t base = (i * cols_ + j) * nc;
      for (std::size_t q = 0; q < nc; ++q) g(i + j * rows_, base + q) = z[q];
    }
  if (bias_) {
    for (std::size_t i = 0; i < rows_; ++i) {
      const std::size_t base = (rows_ * cols_ + i) * nc;
      for (std::size_t q = 0; q < nc; ++q) g(rows_ * cols_ + i, base + q) = z[q];
    }
  }
  return g;
}

void PerEntryField::initialize(std::span<double> p, const InitSpec& init,
                               std::mt19937_64& rng) const {
  const std::size_t nc = shape_.coeff_count();
  const double fan_in = static_cast<double>(cols_);
  double* a = p.data();
  for (std::size_t e = 0; e < rows_ * cols_; ++e, a += nc) {
    for (std::size_t q = 0; q < nc; ++q) {
      if (init.mode == InitMode::Normal) {
        a[q] = draw(rng, init.scale);
      } else if (shape_.kind() == BasisKind::RandomFeature) {
        a[q] = draw(rng, init.scale / std::sqrt(fan_in * static_cast<double>(nc)));
      } else {
        a[q] = shape_.frequency_index(q) == 0 ? draw(rng, init.scale / std::sqrt(fan_in))
                                              : 0.0;
      }
    }
  }
  if (bias_) {
    for (std::size_t i = 0; i < rows_; ++i, a += nc)
      for (std::size_t q = 0; q < nc; ++q)
        a[q] = init.mode == InitMode::Normal ? draw(rng, init.scale) : 0.0;
  }
}

void PerEntryField::penalty_weights(std::span<double> out, bool frequency_weighted) const {
  const std::size_t nc = shape_.coeff_count();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = shape_.penalty_weight(k % nc, frequency_weighted);
}

// ---------------------------------------------------------------- ortho

OrthoField::OrthoField(std::size_t n, BasisShape inner, bool bias)
    : field_(n, std::move(inner)), bias_(bias) {}

std::size_t OrthoField::param_count() const {
  return field_.param_count() + (bias_ ? field_.dim() * field_.inner().coeff_count() : 0);
}

AffineSlice OrthoField::materialize(std::span<const double> p, double t) const {
  NANODE_REQUIRE(p.size() == param_count(), "ortho field parameter count");
  const std::size_t n = field_.dim();
  const std::size_t nc = field_.inner().coeff_count();
  AffineSlice out{field_.eval(p.first(field_.param_count()), t), Vector(n)};
  if (bias_) {
    const Vector z = field_.inner().features(t);
    const double* a = p.data() + field_.param_count();
    for (std::size_t i = 0; i < n; ++i, a += nc) {
      double s = 0.0;
      for (std::size_t q = 0; q < nc; ++q) s += a[q] * z[q];
      out.b[i] = s;
    }
  }
  return out;
}

void OrthoField::pullback(std::span<const double> p, double t, const Matrix& dw,
                          const Vector& db, std::span<double> dp) const {
  const std::size_t np = field_.param_count();
  field_.pullback(p.first(np), t, dw, dp.first(np));
  if (bias_) {
    const std::size_t nc = field_.inner().coeff_count();
    const Vector z = field_.inner().features(t);
    double* g = dp.data() + np;
    for (std::size_t i = 0; i < field_.dim(); ++i, g += nc)
      for (std::size_t q = 0; q < nc; ++q) g[q] += db[i] * z[q];
  }
}

Matrix OrthoField::gamma(std::span<const double> p, double t) const {
  const std::size_t n = field_.dim();
  const std::size_t np = field_.param_count();
  const Matrix gw = field_.gamma(p.first(np), t);
  Matrix g(n * n + (bias_ ? n : 0), param_count());
  for (std::size_t r = 0; r < n * n; ++r)
    for (std::size_t c = 0; c < np; ++c) g(r, c) = gw(r, c);
  if (bias_) {
    const std::size_t nc = field_.inner().coeff_count();
    const Vector z = field_.inner().features(t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t q = 0; q < nc; ++q) g(n * n + i, np + i * nc + q) = z[q];
  }
  return g;
}

void OrthoField::initialize(std::span<double> p, const InitSpec& init,
                            std::mt19937_64& rng) const {
  const std::size_t nc = field_.inner().coeff_count();
  const std::size_t np = field_.param_count();
  for (std::size_t k = 0; k < np; ++k) {
    if (init.mode == InitMode::Normal || field_.inner().kind() == BasisKind::RandomFeature)
      p[k] = draw(rng, init.scale);
    else
      p[k] = field_.inner().frequency_index(k % nc) == 0 ? draw(rng, 1.0) : 0.0;
  }
  for (std::size_t k = np; k < p.size(); ++k)
    p[k] = init.mode == InitMode::Normal ? draw(rng, init.scale) : 0.0;
}

void OrthoField::penalty_weights(std::span<double> out, bool frequency_weighted) const {
  const std::size_t nc = field_.inner().coeff_count();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = field_.inner().penalty_weight(k % nc, frequency_weighted);
}

// ---------------------------------------------------------------- hypernet

HypernetField::HypernetField(std::size_t rows, std::size_t cols, bool bias, double horizon)
    : rows_(rows), cols_(cols), bias_(bias), horizon_(horizon) {
  NANODE_REQUIRE(rows > 0 && cols > 0, "weight field needs positive dimensions");
  NANODE_REQUIRE(horizon > 0.0, "hypernetwork horizon must be positive");
}

std::size_t HypernetField::param_count() const {
  return net_offset() + kWidth * (kEmbed + 1) + kWidth + kWidth + 1;
}

double HypernetField::psi(std::span<const double> p, std::size_t entry, double t) const {
  const double* v = p.data() + entry * kEmbed;
  const double* w1 = p.data() + net_offset();
  const double* b1 = w1 + kWidth * (kEmbed + 1);
  const double* w2 = b1 + kWidth;
  const double b2 = w2[kWidth];
  double out = b2;
  for (std::size_t h = 0; h < kWidth; ++h) {
    const double* row = w1 + h * (kEmbed + 1);
    double pre = b1[h] + row[kEmbed] * t;
    for (std::size_t e = 0; e < kEmbed; ++e) pre += row[e] * v[e];
    out += w2[h] * std::tanh(pre);
  }
  return out;
}

void HypernetField::psi_grad(std::span<const double> p, std::size_t entry, double t,
                             double scale, std::span<double> dp) const {
  const std::size_t off = net_offset();
  const double* v = p.data() + entry * kEmbed;
  const double* w1 = p.data() + off;
  const double* b1 = w1 + kWidth * (kEmbed + 1);
  const double* w2 = b1 + kWidth;
  double* dv = dp.data() + entry * kEmbed;
  double* dw1 = dp.data() + off;
  double* db1 = dw1 + kWidth * (kEmbed + 1);
  double* dw2 = db1 + kWidth;
  for (std::size_t h = 0; h < kWidth; ++h) {
    const double* row = w1 + h * (kEmbed + 1);
    double pre = b1[h] + row[kEmbed] * t;
    for (std::size_t e = 0; e < kEmbed; ++e) pre += row[e] * v[e];
    const double act = std::tanh(pre);
    dw2[h] += scale * act;
    const double g = scale * w2[h] * (1.0 - act * act);
    db1[h] += g;
    double* drow = dw1 + h * (kEmbed + 1);
    for (std::size_t e = 0; e < kEmbed; ++e) {
      drow[e] += g * v[e];
      dv[e] += g * row[e];
    }
    drow[kEmbed] += g * t;
  }
  dw2[kWidth] += scale;
}

AffineSlice HypernetField::materialize(std::span<const double> p, double t) const {
  NANODE_REQUIRE(p.size() == param_count(), "hypernetwork field parameter count");
  if (!(t >= -1e-12 * horizon_ && t <= horizon_ * (1.0 + 1e-12)))
    throw ContractViolation("hypernetwork field evaluated outside [0, T]");
  AffineSlice out{Matrix(rows_, cols_), Vector(rows_)};
  for (std::size_t e = 0; e < rows_ * cols_; ++e) out.w.data()[e] = psi(p, e, t);
  if (bias_)
    for (std::size_t i = 0; i < rows_; ++i) out.b[i] = psi(p, rows_ * cols_ + i, t);
  return out;
}

void HypernetField::pullback(std::span<const double> p, double t, const Matrix& dw,
                             const Vector& db, std::span<double> dp) const {
  for (std::size_t e = 0; e < rows_ * cols_; ++e)
    if (dw.data()[e] != 0.0) psi_grad(p, e, t, dw.data()[e], dp);
  if (bias_)
    for (std::size_t i = 0; i < rows_; ++i)
      if (db[i] != 0.0) psi_grad(p, rows_ * cols_ + i, t, db[i], dp);
}

Matrix HypernetField::gamma(std::span<const double> p, double t) const {
  Matrix g(rows_ * cols_ + (bias_ ? rows_ : 0), param_count());
  std::vector<double> row(param_count());
  auto fill = [&](std::size_t entry, std::size_t out_row) {
    std::fill(row.begin(), row.end(), 0.0);
    psi_grad(p, entry, t, 1.0, row);
    for (std::size_t c = 0; c < row.size(); ++c) g(out_row, c) = row[c];
  };
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) fill(i * cols_ + j, i + j * rows_);
  if (bias_)
    for (std::size_t i = 0; i < rows_; ++i) fill(rows_ * cols_ + i, rows_ * cols_ + i);
  return g;
}

void HypernetField::initialize(std::span<double> p, const InitSpec& init,
                               std::mt19937_64& rng) const {
  if (init.mode == InitMode::Normal) {
    for (double& v : p) v = draw(rng, init.scale);
    return;
  }
  const std::size_t off = net_offset();
  for (std::size_t k = 0; k < off; ++k) p[k] = draw(rng, 1.0);
  double* w1 = p.data() + off;
  double* b1 = w1 + kWidth * (kEmbed + 1);
  double* w2 = b1 + kWidth;
  for (std::size_t k = 0; k < kWidth * (kEmbed + 1); ++k)
    w1[k] = draw(rng, 1.0 / std::sqrt(static_cast<double>(kEmbed + 1)));
  for (std::size_t h = 0; h < kWidth; ++h) b1[h] = 0.0;
  const double out_std =
      init.scale / std::sqrt(static_cast<double>(kWidth) * static_cast<double>(cols_));
  for (std::size_t h = 0; h < kWidth; ++h) w2[h] = draw(rng, out_std);
  w2[kWidth] = 0.0;
}

void HypernetField::penalty_weights(std::span<double> out, bool) const {
  std::fill(out.begin(), out.end(), 0.0);
}

}  // namespace nanode
