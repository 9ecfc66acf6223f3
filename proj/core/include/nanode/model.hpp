#pragma once

// End-to-end model: input stem → NANODE flow block → output stem, with the
// batch loss and its gradient.

#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "nanode/dynamics.hpp"
#include "nanode/grad.hpp"
#include "nanode/odeint.hpp"
#include "nanode/timebasis.hpp"

namespace nanode {

/// Affine: trainable W x + b. Identity: passes the vector through, so the
/// data dimension must equal the state dimension.
enum class Stem { Affine, Identity };

std::string_view to_string(Stem s);
Stem parse_stem(std::string_view name);

enum class LossKind { MSE, CrossEntropy };

std::string_view to_string(LossKind k);
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::MSE;
  double l2_alpha = 0.0;
  /// Penalty weight n² on frequency/degree n instead of 1.
  bool frequency_weighted = false;
};

/// Inputs with regression targets (MSE) or class labels (cross-entropy).
struct Batch {
  std::vector<Vector> inputs;
  std::vector<Vector> targets;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return inputs.size(); }
  /// Examples [first, first + count).
  Batch subset(std::size_t first, std::size_t count) const;
  Batch select(std::span<const std::size_t> indices) const;
};

struct LossGrad {
  double loss = 0.0;  ///< data loss + penalty
  double data_loss = 0.0;
  double penalty = 0.0;
  Vector grad;
  std::size_t activation_memory_units = 0;
};

/// Examples handled per work chunk; fixes the reduction order.
inline constexpr std::size_t kExampleChunk = 8;

class NanodeModel {
 public:
  NanodeModel(std::size_t input_dim, std::size_t output_dim, DynamicsFn flow, SolveSpec solve,
              Stem input_stem = Stem::Affine, Stem output_stem = Stem::Affine);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t state_dim() const noexcept { return flow_.dim(); }
  Stem input_stem() const noexcept { return input_stem_; }
  Stem output_stem() const noexcept { return output_stem_; }
  const DynamicsFn& flow() const noexcept { return flow_; }
  const SolveSpec& solve() const noexcept { return solve_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::size_t param_count() const noexcept { return layout_.total(); }

  std::span<const double> theta() const noexcept { return theta_; }
  std::span<double> theta() noexcept { return theta_; }
  void set_theta(std::span<const double> values);

  /// Flow coefficients from `flow_init`; stems ~ Normal(0, 1/fan_in) with zero bias.
  void initialize(const InitSpec& flow_init, std::mt19937_64& rng);

  /// Input stem applied to x: the initial state of the flow.
  Vector embed(const Vector& x) const;
  Vector forward(const Vector& x) const;
  std::vector<Vector> forward(const std::vector<Vector>& xs, std::size_t threads = 1) const;

  /// Full-length penalty weights (zero outside the flow block).
  Vector penalty_weights(bool frequency_weighted) const;
  double penalty(const LossSpec& loss) const;

  double loss(const Batch& batch, const LossSpec& spec, std::size_t threads = 1) const;
  LossGrad loss_and_grad(const Batch& batch, const LossSpec& spec, GradMethod method,
                         std::size_t threads = 1) const;

 private:
  Vector readout(const Vector& z) const;
  /// Adds stem gradients into g and returns ∂/∂z.
  Vector readout_backward(const Vector& z, const Vector& dy, std::span<double> g) const;
  void embed_backward(const Vector& x, const Vector& dz, std::span<double> g) const;
  Vector forward_cached(const SliceCache& cache, const Vector& x, std::size_t index) const;

  std::size_t input_dim_, output_dim_;
  DynamicsFn flow_;
  SolveSpec solve_;
  Stem input_stem_, output_stem_;
  ParamLayout layout_;
  std::vector<double> theta_;
};

/// Per-example loss; when dout is non-null it receives ∂loss/∂output.
double example_loss(LossKind kind, const Vector& output, const Batch& batch, std::size_t i,
                    Vector* dout = nullptr);

std::size_t argmax(const Vector& v);

}  // namespace nanode
