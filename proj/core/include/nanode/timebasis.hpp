#pragma once

// Scalar functions of time φ(t; α) that parameterize individual weight
// entries. Every basis kind is linear in its coefficients, φ(t; α) = αᵀz(t),
// so a basis is described by its feature map z(t) (BasisShape) and the
// coefficients live wherever the owner keeps them.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nanode/linalg.hpp"

namespace nanode {

enum class BasisKind { Constant, Bucketed, Polynomial, Trigonometric, RandomFeature };
enum class PolyFamily { Monomial, Chebyshev, Legendre };

std::string_view to_string(BasisKind kind);
std::string_view to_string(PolyFamily family);
BasisKind parse_basis_kind(std::string_view name);
PolyFamily parse_poly_family(std::string_view name);

/// Feature map of a time basis. Coefficient layout per kind:
///   Constant      [α₀]
///   Bucketed      [b₀ … b_{d−1}]           piecewise constant, left-closed buckets
///   Polynomial    [α₀ … α_{d−1}]           degree d−1
///   Trigonometric [a₀, a₁…a_d, b₁…b_d]     2d+1 entries
///   RandomFeature [α₁ … α_d]               cos(ω ζ_k t + η_k), ζ/η frozen
class BasisShape {
 public:
  static BasisShape constant(double horizon = 1.0);
  static BasisShape bucketed(std::size_t buckets, double horizon = 1.0);
  static BasisShape polynomial(std::size_t order, PolyFamily family,
                               double horizon = 1.0);
  static BasisShape trigonometric(std::size_t order, double omega = 1.0,
                                  double horizon = 1.0);
  /// ζ_k ~ Normal(0, variance d), η_k ~ Uniform[0, 2π), drawn from `rng`.
  static BasisShape random_feature(std::size_t order, std::mt19937_64& rng,
                                   double omega = 1.0, double horizon = 1.0);
  static BasisShape random_feature(std::size_t order, Vector zeta, Vector eta,
                                   double omega = 1.0, double horizon = 1.0);

  BasisKind kind() const noexcept { return kind_; }
  std::size_t order() const noexcept { return order_; }
  PolyFamily family() const noexcept { return family_; }
  double omega() const noexcept { return omega_; }
  double horizon() const noexcept { return horizon_; }
  const Vector& zeta() const noexcept { return zeta_; }
  const Vector& eta() const noexcept { return eta_; }

  std::size_t coeff_count() const noexcept;

  /// Throws ContractViolation unless 0 ≤ t ≤ horizon.
  void check_time(double t) const;

  /// z(t); `out.size()` must equal coeff_count().
  void features(double t, std::span<double> out) const;
  Vector features(double t) const;
  /// dz/dt; zero for Constant and for Bucketed away from breakpoints.
  void feature_derivatives(double t, std::span<double> out) const;

  /// Bucket selected at time t (Bucketed only).
  std::size_t bucket_index(double t) const;

  /// Frequency/degree index of coefficient n. Index 0 marks the
  /// time-independent component, which the coefficient penalty skips.
  std::size_t frequency_index(std::size_t n) const;
  /// Weight of coefficient n in the L2 penalty (0 = not penalized).
  double penalty_weight(std::size_t n, bool frequency_weighted) const;

  /// Values of z for polynomial families at an already-mapped s ∈ [−1, 1].
  static void polynomial_features(PolyFamily family, double s,
                                  std::span<double> out);

 private:
  BasisKind kind_ = BasisKind::Constant;
  std::size_t order_ = 0;
  PolyFamily family_ = PolyFamily::Chebyshev;
  double omega_ = 1.0;
  double horizon_ = 1.0;
  Vector zeta_;
  Vector eta_;
};

/// A basis together with its own coefficient vector.
struct TimeBasis {
  BasisShape shape;
  Vector coeffs;

  TimeBasis(BasisShape s, Vector c);

  double eval(double t) const;
  /// ∂φ/∂α · upstream.
  Vector grad_coeffs(double t, double upstream) const;
  double time_derivative(double t) const;
};

/// Named slice of a flat parameter vector.
struct ParamView {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  std::span<const double> of(std::span<const double> theta) const {
    return theta.subspan(offset, length);
  }
  std::span<double> of(std::span<double> theta) const {
    return theta.subspan(offset, length);
  }
};

/// Disjoint, exhaustive partition of a parameter vector into views.
class ParamLayout {
 public:
  const ParamView& add(std::string name, std::size_t length);
  const std::vector<ParamView>& views() const noexcept { return views_; }
  std::size_t total() const noexcept { return total_; }
  const ParamView& find(std::string_view name) const;
  /// Checks that views are disjoint and cover [0, total) exactly.
  bool valid() const;

 private:
  std::vector<ParamView> views_;
  std::size_t total_ = 0;
};

}  // namespace nanode
