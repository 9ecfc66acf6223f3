#include "nanode/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nanode/parallel.hpp"

namespace nanode {

std::string_view to_string(Stem s) { return s == Stem::Affine ? "affine" : "identity"; }

Stem parse_stem(std::string_view name) {
  if (name == "affine") return Stem::Affine;
  if (name == "identity") return Stem::Identity;
  throw ContractViolation("unknown stem '" + std::string(name) + "'");
}

std::string_view to_string(LossKind k) {
  return k == LossKind::MSE ? "mse" : "cross_entropy";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mse") return LossKind::MSE;
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  throw ContractViolation("unknown loss '" + std::string(name) + "'");
}

Batch Batch::subset(std::size_t first, std::size_t count) const {
  NANODE_REQUIRE(first + count <= size(), "batch subset out of range");
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = first + i;
  return select(idx);
}

Batch Batch::select(std::span<const std::size_t> indices) const {
  Batch out;
  out.inputs.reserve(indices.size());
  for (std::size_t i : indices) {
    NANODE_REQUIRE(i < size(), "batch index out of range");
    out.inputs.push_back(inputs[i]);
    if (!targets.empty()) out.targets.push_back(targets[i]);
    if (!labels.empty()) out.labels.push_back(labels[i]);
  }
  return out;
}

std::size_t argmax(const Vector& v) {
  NANODE_REQUIRE(!v.empty(), "argmax of empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double example_loss(LossKind kind, const Vector& y, const Batch& batch, std::size_t i,
                    Vector* dout) {
  if (kind == LossKind::MSE) {
    NANODE_REQUIRE(i < batch.targets.size(), "MSE loss needs regression targets");
    const Vector& target = batch.targets[i];
    NANODE_REQUIRE(target.dim() == y.dim(), "target dimension mismatch");
    const double inv = 1.0 / static_cast<double>(y.dim());
    double l = 0.0;
    if (dout) *dout = Vector(y.dim());
    for (std::size_t j = 0; j < y.dim(); ++j) {
      const double r = y[j] - target[j];
      l += r * r;
      if (dout) (*dout)[j] = 2.0 * r * inv;
    }
    return l * inv;
  }
  NANODE_REQUIRE(i < batch.labels.size(), "cross-entropy loss needs class labels");
  const std::size_t label = batch.labels[i];
  NANODE_REQUIRE(label < y.dim(), "class label out of range");
  const double m = *std::max_element(y.begin(), y.end());
  double z = 0.0;
  for (double v : y) z += std::exp(v - m);
  const double lse = m + std::log(z);
  if (dout) {
    *dout = Vector(y.dim());
    for (std::size_t j = 0; j < y.dim(); ++j) (*dout)[j] = std::exp(y[j] - lse);
    (*dout)[label] -= 1.0;
  }
  return lse - y[label];
}

// ---------------------------------------------------------------- model

NanodeModel::NanodeModel(std::size_t input_dim, std::size_t output_dim, DynamicsFn flow,
                         SolveSpec solve, Stem input_stem, Stem output_stem)
    : input_dim_(input_dim),
      output_dim_(output_dim),
      flow_(std::move(flow)),
      solve_(solve),
      input_stem_(input_stem),
      output_stem_(output_stem) {
  solve_.validate();
  const std::size_t n = flow_.dim();
  NANODE_REQUIRE(input_dim_ > 0 && output_dim_ > 0, "model dimensions must be positive");
  if (input_stem_ == Stem::Identity)
    NANODE_REQUIRE(input_dim_ == n, "identity input stem needs input dim == state dim");
  if (output_stem_ == Stem::Identity)
    NANODE_REQUIRE(output_dim_ == n, "identity output stem needs output dim == state dim");
  if (input_stem_ == Stem::Affine) {
    layout_.add("input.W", n * input_dim_);
    layout_.add("input.b", n);
  }
  layout_.add("flow", flow_.param_count());
  if (output_stem_ == Stem::Affine) {
    layout_.add("output.W", output_dim_ * n);
    layout_.add("output.b", output_dim_);
  }
  theta_.assign(layout_.total(), 0.0);
}

void NanodeModel::set_theta(std::span<const double> values) {
  NANODE_REQUIRE(values.size() == theta_.size(), "parameter vector length mismatch");
  std::copy(values.begin(), values.end(), theta_.begin());
}

void NanodeModel::initialize(const InitSpec& flow_init, std::mt19937_64& rng) {
  std::fill(theta_.begin(), theta_.end(), 0.0);
  auto stem = [&](std::string_view name, std::size_t fan_in) {
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    for (double& v : layout_.find(name).of(std::span<double>(theta_))) v = dist(rng);
  };
  if (input_stem_ == Stem::Affine) stem("input.W", input_dim_);
  flow_.initialize(layout_.find("flow").of(std::span<double>(theta_)), flow_init, rng);
  if (output_stem_ == Stem::Affine) stem("output.W", state_dim());
}

Vector NanodeModel::embed(const Vector& x) const {
  NANODE_REQUIRE(x.dim() == input_dim_, "input dimension mismatch");
  if (input_stem_ == Stem::Identity) return x;
  const std::size_t n = state_dim();
  const auto w = layout_.find("input.W").of(theta());
  const auto b = layout_.find("input.b").of(theta());
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < input_dim_; ++j) s += w[i * input_dim_ + j] * x[j];
    z[i] = s;
  }
  return z;
}

Vector NanodeModel::readout(const Vector& z) const {
  if (output_stem_ == Stem::Identity) return z;
  const std::size_t n = state_dim();
  const auto w = layout_.find("output.W").of(theta());
  const auto b = layout_.find("output.b").of(theta());
  Vector y(output_dim_);
  for (std::size_t i = 0; i < output_dim_; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < n; ++j) s += w[i * n + j] * z[j];
    y[i] = s;
  }
  return y;
}

Vector NanodeModel::readout_backward(const Vector& z, const Vector& dy,
                                     std::span<double> g) const {
  if (output_stem_ == Stem::Identity) return dy;
  const std::size_t n = state_dim();
  const auto& wv = layout_.find("output.W");
  const auto& bv = layout_.find("output.b");
  const auto w = wv.of(theta());
  Vector dz(n);
  for (std::size_t i = 0; i < output_dim_; ++i) {
    g[bv.offset + i] += dy[i];
    for (std::size_t j = 0; j < n; ++j) {
      g[wv.offset + i * n + j] += dy[i] * z[j];
      dz[j] += w[i * n + j] * dy[i];
    }
  }
  return dz;
}

void NanodeModel::embed_backward(const Vector& x, const Vector& dz, std::span<double> g) const {
  if (input_stem_ == Stem::Identity) return;
  const std::size_t n = state_dim();
  const auto& wv = layout_.find("input.W");
  const auto& bv = layout_.find("input.b");
  for (std::size_t i = 0; i < n; ++i) {
    g[bv.offset + i] += dz[i];
    for (std::size_t j = 0; j < input_dim_; ++j) g[wv.offset + i * input_dim_ + j] += dz[i] * x[j];
  }
}

Vector NanodeModel::forward_cached(const SliceCache& cache, const Vector& x,
                                   std::size_t index) const {
  SolveSpec spec = solve_;
  spec.store_all = false;
  try {
    return readout(integrate(flow_, cache, embed(x), spec).terminal);
  } catch (const DivergenceError& e) {
    throw e.for_example(static_cast<long>(index));
  }
}

Vector NanodeModel::forward(const Vector& x) const {
  const SliceCache cache(flow_, layout_.find("flow").of(theta()), solve_);
  return forward_cached(cache, x, 0);
}

std::vector<Vector> NanodeModel::forward(const std::vector<Vector>& xs,
                                         std::size_t threads) const {
  std::vector<Vector> out(xs.size());
  if (xs.empty()) return out;
  const SliceCache cache(flow_, layout_.find("flow").of(theta()), solve_);
  const std::size_t chunks = (xs.size() + kExampleChunk - 1) / kExampleChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(xs.size(), (c + 1) * kExampleChunk);
    for (std::size_t i = c * kExampleChunk; i < end; ++i) out[i] = forward_cached(cache, xs[i], i);
  });
  return out;
}

Vector NanodeModel::penalty_weights(bool frequency_weighted) const {
  Vector w(param_count());
  const auto& fv = layout_.find("flow");
  flow_.penalty_weights(fv.of(w.span()), frequency_weighted);
  return w;
}

double NanodeModel::penalty(const LossSpec& loss) const {
  if (loss.l2_alpha == 0.0) return 0.0;
  const Vector w = penalty_weights(loss.frequency_weighted);
  double s = 0.0;
  for (std::size_t i = 0; i < theta_.size(); ++i) s += w[i] * theta_[i] * theta_[i];
  return loss.l2_alpha * s;
}

double NanodeModel::loss(const Batch& batch, const LossSpec& spec, std::size_t threads) const {
  NANODE_REQUIRE(batch.size() > 0, "loss of an empty batch");
  const auto outputs = forward(batch.inputs, threads);
  double total = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i)
    total += example_loss(spec.kind, outputs[i], batch, i);
  return total / static_cast<double>(batch.size()) + penalty(spec);
}

LossGrad NanodeModel::loss_and_grad(const Batch& batch, const LossSpec& spec,
                                    GradMethod method, std::size_t threads) const {
  NANODE_REQUIRE(batch.size() > 0, "gradient of an empty batch");
  NANODE_REQUIRE(method != GradMethod::FiniteDiff,
                 "loss_and_grad supports the discrete and adjoint methods");
  NANODE_REQUIRE(spec.l2_alpha >= 0.0, "l2_alpha must be non-negative");
  const std::size_t count = batch.size();
  const double inv = 1.0 / static_cast<double>(count);

  SolveSpec solve = solve_;
  solve.store_all = method == GradMethod::Discrete;
  const auto& fv = layout_.find("flow");
  const auto flow_theta = fv.of(theta());
  const SliceCache cache(flow_, flow_theta, solve);

  struct Partial {
    double loss = 0.0;
    Vector grad;
    std::optional<StageGradients> stages;
  };
  const std::size_t chunks = (count + kExampleChunk - 1) / kExampleChunk;
  std::vector<Partial> parts(chunks);

  parallel_for(chunks, threads, [&](std::size_t c) {
    Partial& p = parts[c];
    p.grad = Vector(param_count());
    p.stages.emplace(cache);
    const std::size_t end = std::min(count, (c + 1) * kExampleChunk);
    for (std::size_t i = c * kExampleChunk; i < end; ++i) {
      const Vector& x = batch.inputs[i];
      try {
        const Trajectory tr = integrate(flow_, cache, embed(x), solve);
        const Vector y = readout(tr.terminal);
        Vector dy;
        p.loss += example_loss(spec.kind, y, batch, i, &dy);
        dy *= inv;
        const Vector dzt = readout_backward(tr.terminal, dy, p.grad.span());
        const Vector dz0 =
            method == GradMethod::Discrete
                ? backprop_discrete(flow_, cache, tr.states, solve, dzt, *p.stages)
                : backprop_adjoint(flow_, cache, tr.terminal, solve, dzt, *p.stages);
        embed_backward(x, dz0, p.grad.span());
      } catch (const DivergenceError& e) {
        throw e.for_example(static_cast<long>(i));
      }
    }
  });

  LossGrad out;
  out.grad = Vector(param_count());
  StageGradients stages(cache);
  for (auto& p : parts) {
    out.data_loss += p.loss;
    out.grad += p.grad;
    stages += *p.stages;
  }
  out.data_loss *= inv;
  stages.pullback(flow_, flow_theta, solve, fv.of(out.grad.span()));

  if (spec.l2_alpha > 0.0) {
    const Vector w = penalty_weights(spec.frequency_weighted);
    for (std::size_t i = 0; i < theta_.size(); ++i) {
      out.penalty += spec.l2_alpha * w[i] * theta_[i] * theta_[i];
      out.grad[i] += 2.0 * spec.l2_alpha * w[i] * theta_[i];
    }
  }
  out.loss = out.data_loss + out.penalty;
  out.activation_memory_units =
      method == GradMethod::Discrete ? solve.steps + 1 : kAdjointMemoryUnits;
  return out;
}

}  // namespace nanode
