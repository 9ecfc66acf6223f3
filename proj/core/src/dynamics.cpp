#include "nanode/dynamics.hpp"

#include <cmath>
#include <functional>

namespace nanode {

std::string_view to_string(Activation a) {
  return a == Activation::Tanh ? "tanh" : "identity";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Autonomous: return "autonomous";
    case Variant::AppendTime: return "append_time";
    case Variant::Nanode: return "nanode";
    case Variant::GatedMixture: return "gated_mixture";
    case Variant::DirectHypernet: return "direct_hypernet";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw ContractViolation("unknown activation '" + std::string(name) + "'");
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::Autonomous, Variant::AppendTime, Variant::Nanode,
                 Variant::GatedMixture, Variant::DirectHypernet})
    if (to_string(v) == name) return v;
  throw ContractViolation("unknown dynamics variant '" + std::string(name) + "'");
}

double activate(Activation a, double v) {
  return a == Activation::Tanh ? std::tanh(v) : v;
}

double activate_derivative(Activation a, double v) {
  if (a == Activation::Identity) return 1.0;
  const double th = std::tanh(v);
  return 1.0 - th * th;
}

namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

// ---------------------------------------------------------------- SliceGrad

SliceGrad SliceGrad::zeros_like(const Slice& s) {
  SliceGrad g;
  g.stacks.reserve(s.stacks.size());
  for (const auto& st : s.stacks) {
    auto& out = g.stacks.emplace_back();
    out.reserve(st.size());
    for (const auto& l : st)
      out.push_back(AffineSlice{Matrix(l.w.rows(), l.w.cols()), Vector(l.b.dim())});
  }
  g.gates.assign(s.gates.size(), 0.0);
  return g;
}

SliceGrad& SliceGrad::operator+=(const SliceGrad& o) {
  NANODE_REQUIRE(stacks.size() == o.stacks.size() && gates.size() == o.gates.size(),
                 "slice gradient structure mismatch");
  for (std::size_t s = 0; s < stacks.size(); ++s)
    for (std::size_t l = 0; l < stacks[s].size(); ++l) {
      stacks[s][l].w += o.stacks[s][l].w;
      stacks[s][l].b += o.stacks[s][l].b;
    }
  for (std::size_t n = 0; n < gates.size(); ++n) gates[n] += o.gates[n];
  return *this;
}

// ---------------------------------------------------------------- builders

DynamicsFn::DynamicsFn(Variant variant, std::size_t dim, std::vector<LayerStack> stacks,
                       double horizon, bool gated)
    : variant_(variant), dim_(dim), stacks_(std::move(stacks)), horizon_(horizon),
      gated_(gated) {
  NANODE_REQUIRE(dim > 0, "dynamics dimension must be positive");
  NANODE_REQUIRE(!stacks_.empty(), "dynamics needs at least one layer stack");
  NANODE_REQUIRE(horizon > 0.0, "dynamics horizon must be positive");
  std::size_t offset = 0;
  for (auto& st : stacks_) {
    NANODE_REQUIRE(!st.layers.empty(), "layer stack must not be empty");
    std::size_t width = dim_;
    for (auto& layer : st.layers) {
      NANODE_REQUIRE(layer.field != nullptr, "layer without weight field");
      const std::size_t in = width + (layer.append_time ? 1 : 0);
      NANODE_REQUIRE(layer.field->cols() == in, "layer input width mismatch");
      width = layer.field->rows();
      layer.offset = offset;
      offset += layer.field->param_count();
    }
    NANODE_REQUIRE(width == dim_, "layer stack must map back to the state dimension");
  }
  gate_offset_ = offset;
  if (gated_) offset += 2 * stacks_.size();
  param_count_ = offset;
}

namespace {

LayerStack make_stack(std::size_t n, std::size_t layers, Activation act, bool append_time,
                      const std::function<std::shared_ptr<const WeightField>(std::size_t)>&
                          make_field) {
  NANODE_REQUIRE(layers >= 1, "at least one layer required");
  LayerStack st;
  for (std::size_t l = 0; l < layers; ++l) {
    Layer layer;
    layer.field = make_field(n + (append_time ? 1 : 0));
    layer.activation = act;
    layer.append_time = append_time;
    st.layers.push_back(std::move(layer));
  }
  return st;
}

}  // namespace

DynamicsFn DynamicsFn::autonomous(std::size_t n, std::size_t layers, Activation act,
                                  double horizon, bool bias) {
  auto shape = BasisShape::constant(horizon);
  std::vector<LayerStack> st{make_stack(n, layers, act, false, [&](std::size_t cols) {
    return std::make_shared<PerEntryField>(n, cols, shape, bias);
  })};
  return DynamicsFn(Variant::Autonomous, n, std::move(st), horizon);
}

DynamicsFn DynamicsFn::append_time(std::size_t n, std::size_t layers, Activation act,
                                   double horizon, bool bias) {
  auto shape = BasisShape::constant(horizon);
  std::vector<LayerStack> st{make_stack(n, layers, act, true, [&](std::size_t cols) {
    return std::make_shared<PerEntryField>(n, cols, shape, bias);
  })};
  return DynamicsFn(Variant::AppendTime, n, std::move(st), horizon);
}

DynamicsFn DynamicsFn::nanode(std::size_t n, std::size_t layers, const BasisShape& basis,
                              Activation act, bool bias) {
  std::vector<LayerStack> st{make_stack(n, layers, act, false, [&](std::size_t cols) {
    return std::make_shared<PerEntryField>(n, cols, basis, bias);
  })};
  return DynamicsFn(Variant::Nanode, n, std::move(st), basis.horizon());
}

DynamicsFn DynamicsFn::ortho_nanode(std::size_t n, std::size_t layers,
                                    const BasisShape& inner, Activation act, bool bias) {
  std::vector<LayerStack> st{make_stack(n, layers, act, false, [&](std::size_t) {
    return std::make_shared<OrthoField>(n, inner, bias);
  })};
  return DynamicsFn(Variant::Nanode, n, std::move(st), inner.horizon());
}

DynamicsFn DynamicsFn::gated_mixture(std::size_t n, std::size_t gates, std::size_t layers,
                                     const BasisShape& basis, Activation act, bool bias) {
  NANODE_REQUIRE(gates >= 1, "gated mixture needs at least one sub-dynamics");
  std::vector<LayerStack> st;
  for (std::size_t g = 0; g < gates; ++g)
    st.push_back(make_stack(n, layers, act, false, [&](std::size_t cols) {
      return std::make_shared<PerEntryField>(n, cols, basis, bias);
    }));
  return DynamicsFn(Variant::GatedMixture, n, std::move(st), basis.horizon(), true);
}

DynamicsFn DynamicsFn::direct_hypernet(std::size_t n, std::size_t layers, Activation act,
                                       double horizon, bool bias) {
  std::vector<LayerStack> st{make_stack(n, layers, act, false, [&](std::size_t cols) {
    return std::make_shared<HypernetField>(n, cols, bias, horizon);
  })};
  return DynamicsFn(Variant::DirectHypernet, n, std::move(st), horizon);
}

bool DynamicsFn::has_bucketed() const { return bucket_count() > 0; }

std::size_t DynamicsFn::bucket_count() const {
  for (const auto& st : stacks_)
    for (const auto& layer : st.layers)
      if (const auto* pe = dynamic_cast<const PerEntryField*>(layer.field.get())) {
        if (pe->shape().kind() == BasisKind::Bucketed) return pe->shape().order();
      } else if (const auto* of = dynamic_cast<const OrthoField*>(layer.field.get())) {
        if (of->field().inner().kind() == BasisKind::Bucketed) return of->field().inner().order();
      }
  return 0;
}

// ---------------------------------------------------------------- evaluation

Slice DynamicsFn::slice(std::span<const double> theta, double t) const {
  NANODE_REQUIRE(theta.size() == param_count_, "parameter vector length mismatch");
  Slice s;
  s.t = t;
  s.stacks.reserve(stacks_.size());
  for (const auto& st : stacks_) {
    auto& out = s.stacks.emplace_back();
    out.reserve(st.layers.size());
    for (const auto& layer : st.layers) {
      out.push_back(layer.field->materialize(
          theta.subspan(layer.offset, layer.field->param_count()), t));
      if (!all_finite(out.back().w.span()) || !all_finite(out.back().b.span()))
        throw NumericOverflow("non-finite weight field", t);
    }
  }
  if (gated_) {
    s.gates.resize(stacks_.size());
    for (std::size_t n = 0; n < stacks_.size(); ++n)
      s.gates[n] = logistic(theta[gate_offset_ + 2 * n] * t + theta[gate_offset_ + 2 * n + 1]);
  }
  return s;
}

DynamicsFn::StackTrace DynamicsFn::run_stack(std::size_t si, const Slice& s,
                                             const Vector& x) const {
  NANODE_REQUIRE(x.dim() == dim_, "state dimension mismatch");
  const auto& st = stacks_[si];
  StackTrace tr;
  tr.inputs.reserve(st.layers.size());
  tr.pre.reserve(st.layers.size());
  Vector h = x;
  for (std::size_t l = 0; l < st.layers.size(); ++l) {
    const auto& layer = st.layers[l];
    const auto& aff = s.stacks[si][l];
    Vector in = h;
    if (layer.append_time) {
      Vector ext(h.dim() + 1);
      for (std::size_t i = 0; i < h.dim(); ++i) ext[i] = h[i];
      ext[h.dim()] = s.t;
      in = std::move(ext);
    }
    Vector pre = matvec(aff.w, in);
    pre += aff.b;
    h = Vector(pre.dim());
    for (std::size_t i = 0; i < pre.dim(); ++i) h[i] = activate(layer.activation, pre[i]);
    tr.inputs.push_back(std::move(in));
    tr.pre.push_back(std::move(pre));
  }
  tr.out = std::move(h);
  return tr;
}

Vector DynamicsFn::eval(const Slice& s, const Vector& x) const {
  Vector f;
  if (!gated_) {
    f = run_stack(0, s, x).out;
  } else {
    f = Vector(dim_);
    for (std::size_t n = 0; n < stacks_.size(); ++n) f.axpy(s.gates[n], run_stack(n, s, x).out);
  }
  if (!all_finite(f.span())) throw NumericOverflow("non-finite right-hand side", s.t);
  return f;
}

Matrix DynamicsFn::jac_x(const Slice& s, const Vector& x) const {
  Matrix total(dim_, dim_);
  for (std::size_t si = 0; si < stacks_.size(); ++si) {
    const auto tr = run_stack(si, s, x);
    Matrix j = Matrix::identity(dim_);
    for (std::size_t l = 0; l < stacks_[si].layers.size(); ++l) {
      const auto& layer = stacks_[si].layers[l];
      const auto& w = s.stacks[si][l].w;
      Matrix next(w.rows(), dim_);
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const double dsig = activate_derivative(layer.activation, tr.pre[l][i]);
        for (std::size_t k = 0; k < j.rows(); ++k) {
          const double wik = w(i, k) * dsig;
          if (wik == 0.0) continue;
          for (std::size_t c = 0; c < dim_; ++c) next(i, c) += wik * j(k, c);
        }
      }
      j = std::move(next);
    }
    total.axpy(gated_ ? s.gates[si] : 1.0, j);
  }
  return total;
}

Vector DynamicsFn::vjp(const Slice& s, const Vector& x, const Vector& a, double weight,
                       SliceGrad& acc) const {
  NANODE_REQUIRE(a.dim() == dim_, "co-vector dimension mismatch");
  Vector dx(dim_);
  for (std::size_t si = 0; si < stacks_.size(); ++si) {
    const auto tr = run_stack(si, s, x);
    const double gate = gated_ ? s.gates[si] : 1.0;
    if (gated_) acc.gates[si] += weight * dot(a, tr.out);
    Vector g = a;
    g *= gate;
    for (std::size_t l = stacks_[si].layers.size(); l-- > 0;) {
      const auto& layer = stacks_[si].layers[l];
      const auto& w = s.stacks[si][l].w;
      Vector dpre(g.dim());
      for (std::size_t i = 0; i < g.dim(); ++i)
        dpre[i] = g[i] * activate_derivative(layer.activation, tr.pre[l][i]);
      add_outer(acc.stacks[si][l].w, weight, dpre, tr.inputs[l]);
      acc.stacks[si][l].b.axpy(weight, dpre);
      Vector din = matvec_transposed(w, dpre);
      g = Vector(dim_);
      for (std::size_t i = 0; i < dim_; ++i) g[i] = din[i];  // drop the time input
    }
    dx += g;
  }
  return dx;
}

void DynamicsFn::pullback(std::span<const double> theta, double t, const SliceGrad& g,
                          std::span<double> dtheta) const {
  NANODE_REQUIRE(dtheta.size() == param_count_, "gradient vector length mismatch");
  for (std::size_t si = 0; si < stacks_.size(); ++si)
    for (std::size_t l = 0; l < stacks_[si].layers.size(); ++l) {
      const auto& layer = stacks_[si].layers[l];
      const std::size_t np = layer.field->param_count();
      layer.field->pullback(theta.subspan(layer.offset, np), t, g.stacks[si][l].w,
                            g.stacks[si][l].b, dtheta.subspan(layer.offset, np));
    }
  if (gated_) {
    for (std::size_t n = 0; n < stacks_.size(); ++n) {
      const double c = theta[gate_offset_ + 2 * n], e = theta[gate_offset_ + 2 * n + 1];
      const double sig = logistic(c * t + e);
      const double ds = sig * (1.0 - sig) * g.gates[n];
      dtheta[gate_offset_ + 2 * n] += ds * t;
      dtheta[gate_offset_ + 2 * n + 1] += ds;
    }
  }
}

Vector DynamicsFn::eval_f(const Vector& x, double t, std::span<const double> theta) const {
  return eval(slice(theta, t), x);
}

Matrix DynamicsFn::jac_x(const Vector& x, double t, std::span<const double> theta) const {
  return jac_x(slice(theta, t), x);
}

Matrix DynamicsFn::jac_theta(const Vector& x, double t, std::span<const double> theta) const {
  const Slice s = slice(theta, t);
  Matrix out(dim_, param_count_);
  for (std::size_t si = 0; si < stacks_.size(); ++si) {
    const auto& st = stacks_[si];
    const auto tr = run_stack(si, s, x);
    const double gate = gated_ ? s.gates[si] : 1.0;
    const std::size_t nl = st.layers.size();

    // down[l] = ∂out/∂pre_l, built from the last layer backwards.
    std::vector<Matrix> down(nl);
    {
      Matrix m(dim_, dim_);
      for (std::size_t i = 0; i < dim_; ++i)
        m(i, i) = activate_derivative(st.layers[nl - 1].activation, tr.pre[nl - 1][i]);
      down[nl - 1] = std::move(m);
    }
    for (std::size_t l = nl - 1; l-- > 0;) {
      const auto& w = s.stacks[si][l + 1].w;
      Matrix m(dim_, dim_);
      for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t k = 0; k < dim_; ++k) {
          double acc = 0.0;
          for (std::size_t i = 0; i < w.rows(); ++i) acc += down[l + 1](r, i) * w(i, k);
          m(r, k) = acc * activate_derivative(st.layers[l].activation, tr.pre[l][k]);
        }
      down[l] = std::move(m);
    }

    for (std::size_t l = 0; l < nl; ++l) {
      const auto& layer = st.layers[l];
      const std::size_t np = layer.field->param_count();
      const Matrix gamma = layer.field->gamma(theta.subspan(layer.offset, np), t);
      const std::size_t rows = layer.field->rows();
      const std::size_t cols = layer.field->cols();
      // ∂pre/∂p = (inᵀ ⊗ I)Γ_W + Γ_b
      Matrix dpre(rows, np);
      const Vector& in = tr.inputs[l];
      for (std::size_t j = 0; j < cols; ++j) {
        if (in[j] == 0.0) continue;
        for (std::size_t i = 0; i < rows; ++i) {
          auto src = gamma.row(i + j * rows);
          auto dst = dpre.row(i);
          for (std::size_t c = 0; c < np; ++c) dst[c] += in[j] * src[c];
        }
      }
      if (layer.field->has_bias())
        for (std::size_t i = 0; i < rows; ++i) {
          auto src = gamma.row(rows * cols + i);
          auto dst = dpre.row(i);
          for (std::size_t c = 0; c < np; ++c) dst[c] += src[c];
        }
      const Matrix block = down[l] * dpre;
      for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < np; ++c) out(r, layer.offset + c) += gate * block(r, c);
    }

    if (gated_) {
      const double c = theta[gate_offset_ + 2 * si], e = theta[gate_offset_ + 2 * si + 1];
      const double sig = logistic(c * t + e);
      const double ds = sig * (1.0 - sig);
      for (std::size_t r = 0; r < dim_; ++r) {
        out(r, gate_offset_ + 2 * si) += tr.out[r] * ds * t;
        out(r, gate_offset_ + 2 * si + 1) += tr.out[r] * ds;
      }
    }
  }
  return out;
}

void DynamicsFn::initialize(std::span<double> theta, const InitSpec& init,
                            std::mt19937_64& rng) const {
  NANODE_REQUIRE(theta.size() == param_count_, "parameter vector length mismatch");
  for (const auto& st : stacks_)
    for (const auto& layer : st.layers)
      layer.field->initialize(theta.subspan(layer.offset, layer.field->param_count()), init,
                              rng);
  // Gates start at σ = 1/2 with no time dependence.
  if (gated_)
    for (std::size_t k = gate_offset_; k < param_count_; ++k) theta[k] = 0.0;
}

void DynamicsFn::penalty_weights(std::span<double> out, bool frequency_weighted) const {
  NANODE_REQUIRE(out.size() == param_count_, "penalty weight vector length mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& st : stacks_)
    for (const auto& layer : st.layers)
      layer.field->penalty_weights(out.subspan(layer.offset, layer.field->param_count()),
                                   frequency_weighted);
}

}  // namespace nanode
