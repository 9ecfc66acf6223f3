#pragma once

// Orthogonal-group machinery: Householder reflection chains, Givens rotations
// and equal-angle Givens walks, geodesics Q·exp(tΩ), and the orthogonally
// reparameterized time-varying weight field.
//
// Indices are zero-based throughout: givens(n, i, j, θ) needs i < j < n.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nanode/linalg.hpp"
#include "nanode/timebasis.hpp"

namespace nanode {

/// Norm below which a reflection vector is considered degenerate.
inline constexpr double kMinReflectorNorm = 1e-12;
/// Time-varying reflection vectors below this norm are replaced by identity.
inline constexpr double kFieldReflectorCutoff = 1e-8;

/// Flop counter for instrumented kernels: 2 per multiply-add in vector loops.
struct OpCounter {
  std::uint64_t flops = 0;
};

/// H(u) = I − 2uuᵀ/‖u‖². Throws DegenerateVector when ‖u‖ ≤ 1e-12.
Matrix householder_reflect(const Vector& u);

/// s·H(u₁)…H(u_d).
struct HouseholderChain {
  std::vector<Vector> vectors;
  int sign = 1;

  std::size_t dim() const;
  /// Throws when vectors is empty, dims disagree, a vector is degenerate, or
  /// sign ∉ {−1, +1}.
  void validate() const;
};

Matrix chain_materialize(const HouseholderChain& chain);

/// Applies the chain to x right-to-left without forming any matrix.
/// Precomputes 1/‖u‖² once; the counted cost is exactly 4·d·N flops
/// (plus N when sign = −1).
Vector chain_apply(const HouseholderChain& chain, const Vector& x,
                   OpCounter* counter = nullptr);

/// Dense product with the same counting rule: exactly 2·N² flops.
Vector dense_apply(const Matrix& m, const Vector& x, OpCounter* counter = nullptr);

/// Identity except (i,i) = (j,j) = cos θ, (i,j) = sin θ, (j,i) = −sin θ.
Matrix givens(std::size_t n, std::size_t i, std::size_t j, double theta);

/// W = Q·G(i₁,j₁,θ)·…·G(i_k,j_k,θ), all rotations sharing one angle.
struct GivensWalk {
  Matrix start;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double angle = 0.0;

  void validate() const;
};

Matrix walk_materialize(const GivensWalk& walk);

/// Q·exp(tΩ). Requires Q orthogonal (defect ≤ 1e-8) and Ω skew (≤ 1e-12).
Matrix geodesic(const Matrix& q, const Matrix& omega, double t);

/// Basis element H_ij of the skew-symmetric matrices: (i,j)=1, (j,i)=−1.
Matrix skew_basis(std::size_t n, std::size_t i, std::size_t j);

/// Time-varying orthogonal matrix W(t) = H(u₁(t))…H(u_N(t)) with every
/// coordinate of every u_k(t) given by its own basis expansion. Coefficients
/// are stored reflection-major: [k][m][n] for reflection k, coordinate m,
/// basis coefficient n. Sign is fixed to +1.
class OrthoWrappedField {
 public:
  OrthoWrappedField(std::size_t n, BasisShape inner);

  std::size_t dim() const noexcept { return n_; }
  const BasisShape& inner() const noexcept { return inner_; }
  std::size_t param_count() const noexcept;

  /// Reflection vectors u_k(t).
  std::vector<Vector> reflectors(std::span<const double> coeffs, double t) const;

  /// W(t); reflections with ‖u_k(t)‖ < 1e-8 are replaced by the identity.
  Matrix eval(std::span<const double> coeffs, double t) const;

  /// Accumulates ⟨dW, ∂W/∂coeffs⟩ into dcoeffs.
  void pullback(std::span<const double> coeffs, double t, const Matrix& dw,
                std::span<double> dcoeffs) const;

  /// ∂vec(W)/∂coeffs with vec() stacking columns: row index i + j·N.
  Matrix gamma(std::span<const double> coeffs, double t) const;

 private:
  std::size_t n_;
  BasisShape inner_;
};

Matrix orthofield_eval(const OrthoWrappedField& field,
                       std::span<const double> coeffs, double t);

}  // namespace nanode
