#pragma once

// Right-hand sides f(x, t, θ) built from time-varying weight fields, with
// analytic Jacobians ∂f/∂x, ∂f/∂θ and a vector-Jacobian product used by the
// gradient code.
//
// Evaluation is split in two: `slice(θ, t)` materializes every weight field
// at time t, and the slice is then applied to any number of states. The
// solvers reuse one slice per stage time across a whole batch.

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "nanode/linalg.hpp"
#include "nanode/ortho.hpp"
#include "nanode/timebasis.hpp"

namespace nanode {

enum class Activation { Tanh, Identity };
enum class Variant { Autonomous, AppendTime, Nanode, GatedMixture, DirectHypernet };

std::string_view to_string(Activation a);
std::string_view to_string(Variant v);
Activation parse_activation(std::string_view name);
Variant parse_variant(std::string_view name);

enum class InitMode { FanIn, Normal };

/// FanIn: time-independent weight coefficients ~ Normal(0, scale²/fan_in),
/// everything else 0. Normal: every coefficient ~ Normal(0, scale²).
struct InitSpec {
  InitMode mode = InitMode::FanIn;
  double scale = 1.0;
};

/// W(t) and b(t) of one layer at a fixed time.
struct AffineSlice {
  Matrix w;
  Vector b;
};

/// A matrix-valued function of time together with its bias, owning a
/// contiguous block of the parameter vector.
class WeightField {
 public:
  virtual ~WeightField() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual bool has_bias() const = 0;
  virtual std::size_t param_count() const = 0;

  virtual AffineSlice materialize(std::span<const double> p, double t) const = 0;
  /// dp += ∂⟨dW, W⟩/∂p + ∂⟨db, b⟩/∂p.
  virtual void pullback(std::span<const double> p, double t, const Matrix& dw,
                        const Vector& db, std::span<double> dp) const = 0;
  /// Γ = ∂[vec(W); b]/∂p, vec() stacking columns (row i + j·rows), bias rows
  /// after the rows·cols weight rows.
  virtual Matrix gamma(std::span<const double> p, double t) const = 0;

  virtual void initialize(std::span<double> p, const InitSpec& init,
                          std::mt19937_64& rng) const = 0;
  /// Per-parameter L2 penalty weights; 0 for time-independent components.
  virtual void penalty_weights(std::span<double> out, bool frequency_weighted) const = 0;
};

/// Every entry of W and b is an independent expansion in the same basis.
/// Layout: W entries row-major, then biases; each entry owns coeff_count()
/// consecutive coefficients.
class PerEntryField final : public WeightField {
 public:
  PerEntryField(std::size_t rows, std::size_t cols, BasisShape shape, bool bias);

  const BasisShape& shape() const noexcept { return shape_; }

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  bool has_bias() const override { return bias_; }
  std::size_t param_count() const override;
  AffineSlice materialize(std::span<const double> p, double t) const override;
  void pullback(std::span<const double> p, double t, const Matrix& dw, const Vector& db,
                std::span<double> dp) const override;
  Matrix gamma(std::span<const double> p, double t) const override;
  void initialize(std::span<double> p, const InitSpec& init,
                  std::mt19937_64& rng) const override;
  void penalty_weights(std::span<double> out, bool frequency_weighted) const override;

 private:
  std::size_t rows_, cols_;
  BasisShape shape_;
  bool bias_;
};

/// Square W(t) = H(u₁(t))…H(u_N(t)); biases are per-entry expansions in the
/// same inner basis. Layout: reflection coefficients, then biases.
class OrthoField final : public WeightField {
 public:
  OrthoField(std::size_t n, BasisShape inner, bool bias);

  const OrthoWrappedField& field() const noexcept { return field_; }

  std::size_t rows() const override { return field_.dim(); }
  std::size_t cols() const override { return field_.dim(); }
  bool has_bias() const override { return bias_; }
  std::size_t param_count() const override;
  AffineSlice materialize(std::span<const double> p, double t) const override;
  void pullback(std::span<const double> p, double t, const Matrix& dw, const Vector& db,
                std::span<double> dp) const override;
  Matrix gamma(std::span<const double> p, double t) const override;
  void initialize(std::span<double> p, const InitSpec& init,
                  std::mt19937_64& rng) const override;
  void penalty_weights(std::span<double> out, bool frequency_weighted) const override;

 private:
  OrthoWrappedField field_;
  bool bias_;
};

/// W_ij(t) = Ψ([v_ij; t]) with Ψ a shared two-layer tanh network of width 16
/// and v_ij ∈ ℝ⁴. Layout: v for W entries (row-major), v for biases, then Ψ's
/// first-layer weights (16×5, row-major), first-layer bias, output weights,
/// output bias.
class HypernetField final : public WeightField {
 public:
  static constexpr std::size_t kEmbed = 4;
  static constexpr std::size_t kWidth = 16;

  HypernetField(std::size_t rows, std::size_t cols, bool bias, double horizon = 1.0);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  bool has_bias() const override { return bias_; }
  std::size_t param_count() const override;
  AffineSlice materialize(std::span<const double> p, double t) const override;
  void pullback(std::span<const double> p, double t, const Matrix& dw, const Vector& db,
                std::span<double> dp) const override;
  Matrix gamma(std::span<const double> p, double t) const override;
  void initialize(std::span<double> p, const InitSpec& init,
                  std::mt19937_64& rng) const override;
  void penalty_weights(std::span<double> out, bool frequency_weighted) const override;

 private:
  std::size_t entries() const { return rows_ * cols_ + (bias_ ? rows_ : 0); }
  std::size_t net_offset() const { return entries() * kEmbed; }
  double psi(std::span<const double> p, std::size_t entry, double t) const;
  /// Adds scale·∂Ψ_entry/∂p into dp.
  void psi_grad(std::span<const double> p, std::size_t entry, double t, double scale,
                std::span<double> dp) const;

  std::size_t rows_, cols_;
  bool bias_;
  double horizon_;
};

struct Layer {
  std::shared_ptr<const WeightField> field;
  Activation activation = Activation::Tanh;
  bool append_time = false;  ///< layer input is [h; t]
  std::size_t offset = 0;    ///< position of the field's parameters in θ
};

/// One ordered stack of layers mapping ℝᴺ → ℝᴺ.
struct LayerStack {
  std::vector<Layer> layers;
};

/// All weight fields of a DynamicsFn materialized at one time.
struct Slice {
  double t = 0.0;
  std::vector<std::vector<AffineSlice>> stacks;
  std::vector<double> gates;  ///< σ_n(t); empty unless GatedMixture
};

/// Accumulated ∂/∂(W, b, σ) at one time; same structure as Slice.
struct SliceGrad {
  std::vector<std::vector<AffineSlice>> stacks;
  std::vector<double> gates;

  static SliceGrad zeros_like(const Slice& s);
  SliceGrad& operator+=(const SliceGrad& o);
};

class DynamicsFn {
 public:
  DynamicsFn(Variant variant, std::size_t dim, std::vector<LayerStack> stacks,
             double horizon, bool gated = false);

  // Builders for each variant. Every layer is N×N (N×(N+1) when time is
  // appended) and every stack maps ℝᴺ → ℝᴺ.
  static DynamicsFn autonomous(std::size_t n, std::size_t layers, Activation act,
                               double horizon = 1.0, bool bias = true);
  static DynamicsFn append_time(std::size_t n, std::size_t layers, Activation act,
                                double horizon = 1.0, bool bias = true);
  static DynamicsFn nanode(std::size_t n, std::size_t layers, const BasisShape& basis,
                           Activation act, bool bias = true);
  static DynamicsFn ortho_nanode(std::size_t n, std::size_t layers,
                                 const BasisShape& inner, Activation act,
                                 bool bias = true);
  static DynamicsFn gated_mixture(std::size_t n, std::size_t gates, std::size_t layers,
                                  const BasisShape& basis, Activation act,
                                  bool bias = true);
  static DynamicsFn direct_hypernet(std::size_t n, std::size_t layers, Activation act,
                                    double horizon = 1.0, bool bias = true);

  Variant variant() const noexcept { return variant_; }
  std::size_t dim() const noexcept { return dim_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t param_count() const noexcept { return param_count_; }
  const std::vector<LayerStack>& stacks() const noexcept { return stacks_; }
  bool gated() const noexcept { return gated_; }
  std::size_t gate_offset() const noexcept { return gate_offset_; }
  /// True when some field is piecewise constant in time.
  bool has_bucketed() const;
  /// Bucket count of the first bucketed field (0 when none).
  std::size_t bucket_count() const;

  Slice slice(std::span<const double> theta, double t) const;

  Vector eval(const Slice& s, const Vector& x) const;
  Matrix jac_x(const Slice& s, const Vector& x) const;
  /// Returns aᵀ∂f/∂x and adds weight·∂(aᵀf)/∂(W, b, σ) into acc.
  Vector vjp(const Slice& s, const Vector& x, const Vector& a, double weight,
             SliceGrad& acc) const;
  /// dθ += ∂/∂θ of the slice-level gradient at time t.
  void pullback(std::span<const double> theta, double t, const SliceGrad& g,
                std::span<double> dtheta) const;

  Vector eval_f(const Vector& x, double t, std::span<const double> theta) const;
  Matrix jac_x(const Vector& x, double t, std::span<const double> theta) const;
  /// ∂f/∂θ, assembled per layer as (∂f/∂pre)·diag(σ′)(inᵀ⊗I)Γ.
  Matrix jac_theta(const Vector& x, double t, std::span<const double> theta) const;

  void initialize(std::span<double> theta, const InitSpec& init,
                  std::mt19937_64& rng) const;
  void penalty_weights(std::span<double> out, bool frequency_weighted) const;

 private:
  struct StackTrace {
    std::vector<Vector> inputs;  // layer inputs (with t appended when used)
    std::vector<Vector> pre;     // pre-activations
    Vector out;
  };
  StackTrace run_stack(std::size_t si, const Slice& s, const Vector& x) const;

  Variant variant_;
  std::size_t dim_;
  std::vector<LayerStack> stacks_;
  double horizon_;
  bool gated_;
  std::size_t gate_offset_ = 0;
  std::size_t param_count_ = 0;
};

double activate(Activation a, double v);
double activate_derivative(Activation a, double v);

}  // namespace nanode
