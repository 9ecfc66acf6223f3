#include "nanode/timebasis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nanode {

namespace {

// Times this close to a bucket boundary (in bucket units) count as lying on
// it, so grid points computed as t0 + k·h land in the bucket that starts there.
constexpr double kBucketSnap = 1e-9;
constexpr double kTimeSlack = 1e-12;

}  // namespace

std::string_view to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Constant: return "constant";
    case BasisKind::Bucketed: return "bucketed";
    case BasisKind::Polynomial: return "polynomial";
    case BasisKind::Trigonometric: return "trigonometric";
    case BasisKind::RandomFeature: return "random_feature";
  }
  return "?";
}

std::string_view to_string(PolyFamily family) {
  switch (family) {
    case PolyFamily::Monomial: return "monomial";
    case PolyFamily::Chebyshev: return "chebyshev";
    case PolyFamily::Legendre: return "legendre";
  }
  return "?";
}

BasisKind parse_basis_kind(std::string_view name) {
  for (auto k : {BasisKind::Constant, BasisKind::Bucketed, BasisKind::Polynomial,
                 BasisKind::Trigonometric, BasisKind::RandomFeature})
    if (to_string(k) == name) return k;
  throw ContractViolation("unknown basis kind '" + std::string(name) + "'");
}

PolyFamily parse_poly_family(std::string_view name) {
  for (auto f : {PolyFamily::Monomial, PolyFamily::Chebyshev, PolyFamily::Legendre})
    if (to_string(f) == name) return f;
  throw ContractViolation("unknown polynomial family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- shapes

BasisShape BasisShape::constant(double horizon) {
  NANODE_REQUIRE(horizon > 0.0, "basis horizon must be positive");
  BasisShape s;
  s.kind_ = BasisKind::Constant;
  s.horizon_ = horizon;
  return s;
}

BasisShape BasisShape::bucketed(std::size_t buckets, double horizon) {
  NANODE_REQUIRE(buckets >= 1, "bucketed basis needs at least one bucket");
  NANODE_REQUIRE(horizon > 0.0, "basis horizon must be positive");
  BasisShape s;
  s.kind_ = BasisKind::Bucketed;
  s.order_ = buckets;
  s.horizon_ = horizon;
  return s;
}

BasisShape BasisShape::polynomial(std::size_t order, PolyFamily family,
                                  double horizon) {
  NANODE_REQUIRE(order >= 1, "polynomial basis needs at least one coefficient");
  NANODE_REQUIRE(horizon > 0.0, "basis horizon must be positive");
  BasisShape s;
  s.kind_ = BasisKind::Polynomial;
  s.order_ = order;
  s.family_ = family;
  s.horizon_ = horizon;
  return s;
}

BasisShape BasisShape::trigonometric(std::size_t order, double omega,
                                     double horizon) {
  NANODE_REQUIRE(omega > 0.0, "trigonometric frequency scale must be positive");
  NANODE_REQUIRE(horizon > 0.0, "basis horizon must be positive");
  BasisShape s;
  s.kind_ = BasisKind::Trigonometric;
  s.order_ = order;
  s.omega_ = omega;
  s.horizon_ = horizon;
  return s;
}

BasisShape BasisShape::random_feature(std::size_t order, std::mt19937_64& rng,
                                      double omega, double horizon) {
  NANODE_REQUIRE(order >= 1, "random-feature basis needs at least one feature");
  std::normal_distribution<double> freq(0.0, std::sqrt(static_cast<double>(order)));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Vector zeta(order), eta(order);
  for (std::size_t k = 0; k < order; ++k) zeta[k] = freq(rng);
  for (std::size_t k = 0; k < order; ++k) eta[k] = phase(rng);
  return random_feature(order, std::move(zeta), std::move(eta), omega, horizon);
}

BasisShape BasisShape::random_feature(std::size_t order, Vector zeta, Vector eta,
                                      double omega, double horizon) {
  NANODE_REQUIRE(order >= 1, "random-feature basis needs at least one feature");
  NANODE_REQUIRE(zeta.dim() == order && eta.dim() == order,
                 "random-feature frozen vectors must have length d");
  NANODE_REQUIRE(omega > 0.0, "random-feature frequency scale must be positive");
  NANODE_REQUIRE(horizon > 0.0, "basis horizon must be positive");
  BasisShape s;
  s.kind_ = BasisKind::RandomFeature;
  s.order_ = order;
  s.omega_ = omega;
  s.horizon_ = horizon;
  s.zeta_ = std::move(zeta);
  s.eta_ = std::move(eta);
  return s;
}

std::size_t BasisShape::coeff_count() const noexcept {
  switch (kind_) {
    case BasisKind::Constant: return 1;
    case BasisKind::Bucketed:
    case BasisKind::Polynomial:
    case BasisKind::RandomFeature: return order_;
    case BasisKind::Trigonometric: return 2 * order_ + 1;
  }
  return 0;
}

void BasisShape::check_time(double t) const {
  if (!(t >= -kTimeSlack * horizon_ && t <= horizon_ * (1.0 + kTimeSlack)))
    throw ContractViolation("basis evaluated at t=" + std::to_string(t) +
                            " outside [0, " + std::to_string(horizon_) + "]");
}

std::size_t BasisShape::bucket_index(double t) const {
  NANODE_REQUIRE(kind_ == BasisKind::Bucketed, "bucket_index on non-bucketed basis");
  const double pos = t * static_cast<double>(order_) / horizon_ + kBucketSnap;
  const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
  return std::min(idx, order_ - 1);
}

void BasisShape::polynomial_features(PolyFamily family, double s,
                                     std::span<double> out) {
  const std::size_t d = out.size();
  if (d == 0) return;
  out[0] = 1.0;
  if (d == 1) return;
  switch (family) {
    case PolyFamily::Monomial:
      for (std::size_t n = 1; n < d; ++n) out[n] = out[n - 1] * s;
      break;
    case PolyFamily::Chebyshev:
      out[1] = s;
      for (std::size_t n = 1; n + 1 < d; ++n) out[n + 1] = 2.0 * s * out[n] - out[n - 1];
      break;
    case PolyFamily::Legendre:
      out[1] = s;
      for (std::size_t n = 1; n + 1 < d; ++n) {
        const double nn = static_cast<double>(n);
        out[n + 1] = ((2.0 * nn + 1.0) * s * out[n] - nn * out[n - 1]) / (nn + 1.0);
      }
      break;
  }
}

namespace {

// Monomials use t directly; Chebyshev and Legendre live on [−1, 1].
double poly_argument(PolyFamily family, double t, double horizon) {
  return family == PolyFamily::Monomial ? t : 2.0 * t / horizon - 1.0;
}

double poly_argument_scale(PolyFamily family, double horizon) {
  return family == PolyFamily::Monomial ? 1.0 : 2.0 / horizon;
}

}  // namespace

void BasisShape::features(double t, std::span<double> out) const {
  NANODE_REQUIRE(out.size() == coeff_count(), "feature buffer has wrong length");
  check_time(t);
  switch (kind_) {
    case BasisKind::Constant:
      out[0] = 1.0;
      break;
    case BasisKind::Bucketed:
      std::fill(out.begin(), out.end(), 0.0);
      out[bucket_index(t)] = 1.0;
      break;
    case BasisKind::Polynomial:
      polynomial_features(family_, poly_argument(family_, t, horizon_), out);
      break;
    case BasisKind::Trigonometric:
      out[0] = 1.0;
      for (std::size_t n = 1; n <= order_; ++n) {
        const double arg = static_cast<double>(n) * omega_ * t;
        out[n] = std::cos(arg);
        out[order_ + n] = std::sin(arg);
      }
      break;
    case BasisKind::RandomFeature:
      for (std::size_t k = 0; k < order_; ++k)
        out[k] = std::cos(omega_ * zeta_[k] * t + eta_[k]);
      break;
  }
}

Vector BasisShape::features(double t) const {
  Vector z(coeff_count());
  features(t, z.span());
  return z;
}

void BasisShape::feature_derivatives(double t, std::span<double> out) const {
  NANODE_REQUIRE(out.size() == coeff_count(), "feature buffer has wrong length");
  check_time(t);
  std::fill(out.begin(), out.end(), 0.0);
  switch (kind_) {
    case BasisKind::Constant:
    case BasisKind::Bucketed:
      break;
    case BasisKind::Polynomial: {
      const double s = poly_argument(family_, t, horizon_);
      const double ds = poly_argument_scale(family_, horizon_);
      const std::size_t d = order_;
      std::vector<double> p(d);
      polynomial_features(family_, s, p);
      switch (family_) {
        case PolyFamily::Monomial:
          for (std::size_t n = 1; n < d; ++n)
            out[n] = static_cast<double>(n) * p[n - 1];
          break;
        case PolyFamily::Chebyshev: {
          // T'_n = n U_{n−1}
          double u_prev = 0.0, u = 1.0;
          for (std::size_t n = 1; n < d; ++n) {
            out[n] = static_cast<double>(n) * u;
            const double u_next = (n == 1 ? 2.0 * s : 2.0 * s * u - u_prev);
            u_prev = u;
            u = u_next;
          }
          break;
        }
        case PolyFamily::Legendre:
          // P'_{n+1} = P'_{n−1} + (2n+1) P_n
          if (d > 1) out[1] = 1.0;
          for (std::size_t n = 1; n + 1 < d; ++n)
            out[n + 1] = out[n - 1] + (2.0 * static_cast<double>(n) + 1.0) * p[n];
          break;
      }
      for (double& v : out) v *= ds;
      break;
    }
    case BasisKind::Trigonometric:
      for (std::size_t n = 1; n <= order_; ++n) {
        const double w = static_cast<double>(n) * omega_;
        out[n] = -w * std::sin(w * t);
        out[order_ + n] = w * std::cos(w * t);
      }
      break;
    case BasisKind::RandomFeature:
      for (std::size_t k = 0; k < order_; ++k) {
        const double w = omega_ * zeta_[k];
        out[k] = -w * std::sin(w * t + eta_[k]);
      }
      break;
  }
}

std::size_t BasisShape::frequency_index(std::size_t n) const {
  switch (kind_) {
    case BasisKind::Constant:
    case BasisKind::Bucketed:
      return 0;
    case BasisKind::Polynomial:
      return n;
    case BasisKind::Trigonometric:
      return n <= order_ ? n : n - order_;
    case BasisKind::RandomFeature:
      return 1;
  }
  return 0;
}

double BasisShape::penalty_weight(std::size_t n, bool frequency_weighted) const {
  const std::size_t f = frequency_index(n);
  if (f == 0) return 0.0;
  if (!frequency_weighted || kind_ == BasisKind::RandomFeature) return 1.0;
  return static_cast<double>(f * f);
}

// ---------------------------------------------------------------- TimeBasis

TimeBasis::TimeBasis(BasisShape s, Vector c) : shape(std::move(s)), coeffs(std::move(c)) {
  NANODE_REQUIRE(coeffs.dim() == shape.coeff_count(),
                 "coefficient vector length does not match basis kind/order");
}

double TimeBasis::eval(double t) const {
  const Vector z = shape.features(t);
  return dot(coeffs, z);
}

Vector TimeBasis::grad_coeffs(double t, double upstream) const {
  Vector z = shape.features(t);
  z *= upstream;
  return z;
}

double TimeBasis::time_derivative(double t) const {
  Vector dz(shape.coeff_count());
  shape.feature_derivatives(t, dz.span());
  return dot(coeffs, dz);
}

// ---------------------------------------------------------------- layout

const ParamView& ParamLayout::add(std::string name, std::size_t length) {
  views_.push_back(ParamView{std::move(name), total_, length});
  total_ += length;
  return views_.back();
}

const ParamView& ParamLayout::find(std::string_view name) const {
  for (const auto& v : views_)
    if (v.name == name) return v;
  throw ContractViolation("no parameter view named '" + std::string(name) + "'");
}

bool ParamLayout::valid() const {
  std::size_t cursor = 0;
  for (const auto& v : views_) {
    if (v.offset != cursor) return false;
    cursor += v.length;
  }
  return cursor == total_;
}

}  // namespace nanode
