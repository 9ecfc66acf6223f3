#include "nanode/ortho.hpp"

#include <cmath>
#include <optional>

namespace nanode {

namespace {

// x ← x − c·(uᵀx)·u with c = 2/‖u‖².
void reflect_inplace(const Vector& u, double c, Vector& x) {
  const double proj = c * dot(u, x);
  x.axpy(-proj, u);
}

// M ← M·H(u), columns mixed by the reflection.
void right_reflect(Matrix& m, const Vector& u, double c) {
  const Vector mu = matvec(m, u);
  add_outer(m, -c, mu, u);
}

// M ← H(u)·M.
void left_reflect(Matrix& m, const Vector& u, double c) {
  const Vector utm = matvec_transposed(m, u);
  add_outer(m, -c, u, utm);
}

}  // namespace

Matrix householder_reflect(const Vector& u) {
  NANODE_REQUIRE(u.dim() > 0, "householder_reflect of empty vector");
  const double nn = dot(u, u);
  if (!(std::sqrt(nn) > kMinReflectorNorm))
    throw DegenerateVector("Householder vector has (near-)zero norm");
  Matrix h = Matrix::identity(u.dim());
  add_outer(h, -2.0 / nn, u, u);
  return h;
}

// ---------------------------------------------------------------- chains

std::size_t HouseholderChain::dim() const {
  return vectors.empty() ? 0 : vectors.front().dim();
}

void HouseholderChain::validate() const {
  NANODE_REQUIRE(!vectors.empty(), "Householder chain needs at least one vector");
  NANODE_REQUIRE(sign == 1 || sign == -1, "Householder chain sign must be ±1");
  const std::size_t n = dim();
  NANODE_REQUIRE(n > 0, "Householder vectors must be non-empty");
  for (const auto& u : vectors) {
    NANODE_REQUIRE(u.dim() == n, "Householder vectors must share a dimension");
    if (!(norm2(u) > kMinReflectorNorm))
      throw DegenerateVector("Householder vector has (near-)zero norm");
  }
}

Matrix chain_materialize(const HouseholderChain& chain) {
  chain.validate();
  Matrix m = Matrix::identity(chain.dim());
  for (const auto& u : chain.vectors) right_reflect(m, u, 2.0 / dot(u, u));
  if (chain.sign < 0) m *= -1.0;
  return m;
}

Vector chain_apply(const HouseholderChain& chain, const Vector& x,
                   OpCounter* counter) {
  chain.validate();
  NANODE_REQUIRE(x.dim() == chain.dim(), "chain_apply dimension mismatch");
  std::vector<double> scale(chain.vectors.size());
  for (std::size_t k = 0; k < scale.size(); ++k)
    scale[k] = 2.0 / dot(chain.vectors[k], chain.vectors[k]);

  const std::size_t n = x.dim();
  Vector y = x;
  for (std::size_t k = chain.vectors.size(); k-- > 0;) {
    reflect_inplace(chain.vectors[k], scale[k], y);
    if (counter) counter->flops += 4 * n;
  }
  if (chain.sign < 0) {
    y *= -1.0;
    if (counter) counter->flops += n;
  }
  return y;
}

Vector dense_apply(const Matrix& m, const Vector& x, OpCounter* counter) {
  Vector y = matvec(m, x);
  if (counter) counter->flops += 2 * m.rows() * m.cols();
  return y;
}

// ---------------------------------------------------------------- Givens

Matrix givens(std::size_t n, std::size_t i, std::size_t j, double theta) {
  NANODE_REQUIRE(i < j && j < n, "givens requires i < j < n");
  Matrix g = Matrix::identity(n);
  const double c = std::cos(theta), s = std::sin(theta);
  g(i, i) = c;
  g(j, j) = c;
  g(i, j) = s;
  g(j, i) = -s;
  return g;
}

void GivensWalk::validate() const {
  NANODE_REQUIRE(start.square() && start.rows() > 0,
                 "Givens walk start must be a non-empty square matrix");
  for (const auto& [i, j] : pairs)
    NANODE_REQUIRE(i < j && j < start.rows(), "Givens walk pair out of range");
}

Matrix walk_materialize(const GivensWalk& walk) {
  walk.validate();
  const std::size_t n = walk.start.rows();
  const double c = std::cos(walk.angle), s = std::sin(walk.angle);
  Matrix w = walk.start;
  // Right-multiplying by a rotation only mixes columns i and j.
  for (const auto& [i, j] : walk.pairs) {
    for (std::size_t r = 0; r < n; ++r) {
      const double wi = w(r, i), wj = w(r, j);
      w(r, i) = c * wi - s * wj;
      w(r, j) = s * wi + c * wj;
    }
  }
  return w;
}

Matrix skew_basis(std::size_t n, std::size_t i, std::size_t j) {
  NANODE_REQUIRE(i < j && j < n, "skew_basis requires i < j < n");
  Matrix h(n, n);
  h(i, j) = 1.0;
  h(j, i) = -1.0;
  return h;
}

Matrix geodesic(const Matrix& q, const Matrix& omega, double t) {
  NANODE_REQUIRE(q.square() && omega.square() && q.rows() == omega.rows(),
                 "geodesic requires square matrices of equal size");
  NANODE_REQUIRE(orthogonality_defect(q) <= 1e-8, "geodesic base point is not orthogonal");
  NANODE_REQUIRE(max_abs_diff(omega, -1.0 * omega.transpose()) <= 1e-12,
                 "geodesic direction is not skew-symmetric");
  return q * matexp(t * omega);
}

// ---------------------------------------------------------------- field

OrthoWrappedField::OrthoWrappedField(std::size_t n, BasisShape inner)
    : n_(n), inner_(std::move(inner)) {
  NANODE_REQUIRE(n >= 1, "orthogonal field needs a positive dimension");
}

std::size_t OrthoWrappedField::param_count() const noexcept {
  return n_ * n_ * inner_.coeff_count();
}

std::vector<Vector> OrthoWrappedField::reflectors(std::span<const double> coeffs,
                                                  double t) const {
  NANODE_REQUIRE(coeffs.size() == param_count(), "orthogonal field coefficient count");
  const std::size_t nc = inner_.coeff_count();
  const Vector z = inner_.features(t);
  std::vector<Vector> us(n_, Vector(n_));
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t m = 0; m < n_; ++m) {
      const double* a = coeffs.data() + (k * n_ + m) * nc;
      double s = 0.0;
      for (std::size_t q = 0; q < nc; ++q) s += a[q] * z[q];
      us[k][m] = s;
    }
  return us;
}

namespace {

struct Reflector {
  Vector u;
  double nn = 0.0;    // ‖u‖²
  bool active = false;
};

std::vector<Reflector> prepare(std::vector<Vector> us) {
  std::vector<Reflector> out;
  out.reserve(us.size());
  for (auto& u : us) {
    Reflector r;
    r.nn = dot(u, u);
    r.active = std::sqrt(r.nn) >= kFieldReflectorCutoff;
    r.u = std::move(u);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Matrix OrthoWrappedField::eval(std::span<const double> coeffs, double t) const {
  const auto refl = prepare(reflectors(coeffs, t));
  Matrix m = Matrix::identity(n_);
  for (const auto& r : refl)
    if (r.active) right_reflect(m, r.u, 2.0 / r.nn);
  return m;
}

// With W = P_k H(u_k) S_k, P_k = H₁…H_{k−1}, S_k = H_{k+1}…H_N and
// R = P_kᵀ G S_kᵀ:
//   ∂⟨G, W⟩/∂u_k = −(2/‖u‖²)(Ru + Rᵀu) + (4 uᵀRu/‖u‖⁴) u.
void OrthoWrappedField::pullback(std::span<const double> coeffs, double t,
                                 const Matrix& dw, std::span<double> dcoeffs) const {
  NANODE_REQUIRE(dw.rows() == n_ && dw.cols() == n_, "pullback gradient shape");
  NANODE_REQUIRE(dcoeffs.size() == param_count(), "pullback output length");
  const auto refl = prepare(reflectors(coeffs, t));
  const std::size_t nc = inner_.coeff_count();
  const Vector z = inner_.features(t);

  auto apply = [&](std::size_t k, Vector& v) {
    if (refl[k].active) reflect_inplace(refl[k].u, 2.0 / refl[k].nn, v);
  };

  for (std::size_t k = 0; k < n_; ++k) {
    const auto& r = refl[k];
    if (!r.active) continue;
    // p = P_k u,  q = S_kᵀ u  (reflections are symmetric).
    Vector p = r.u;
    for (std::size_t i = k; i-- > 0;) apply(i, p);
    Vector q = r.u;
    for (std::size_t i = k + 1; i < n_; ++i) apply(i, q);

    // Ru = P_kᵀ (G q)
    Vector ru = matvec(dw, q);
    for (std::size_t i = 0; i < k; ++i) apply(i, ru);
    // Rᵀu = S_k (Gᵀ p)
    Vector rtu = matvec_transposed(dw, p);
    for (std::size_t i = n_; i-- > k + 1;) apply(i, rtu);
    const double urv = dot(p, matvec(dw, q));

    Vector grad_u = ru + rtu;
    grad_u *= -2.0 / r.nn;
    grad_u.axpy(4.0 * urv / (r.nn * r.nn), r.u);

    for (std::size_t m = 0; m < n_; ++m) {
      double* out = dcoeffs.data() + (k * n_ + m) * nc;
      for (std::size_t q2 = 0; q2 < nc; ++q2) out[q2] += grad_u[m] * z[q2];
    }
  }
}

Matrix OrthoWrappedField::gamma(std::span<const double> coeffs, double t) const {
  const auto refl = prepare(reflectors(coeffs, t));
  const std::size_t nc = inner_.coeff_count();
  const Vector z = inner_.features(t);
  Matrix g(n_ * n_, param_count());

  // prefix[k] = H₁…H_{k−1}; suffix[k] = H_{k+1}…H_N.
  std::vector<Matrix> prefix(n_ + 1, Matrix::identity(n_));
  for (std::size_t k = 0; k < n_; ++k) {
    prefix[k + 1] = prefix[k];
    if (refl[k].active) right_reflect(prefix[k + 1], refl[k].u, 2.0 / refl[k].nn);
  }
  std::vector<Matrix> suffix(n_ + 1, Matrix::identity(n_));
  for (std::size_t k = n_; k-- > 0;) {
    suffix[k] = suffix[k + 1];
    if (refl[k].active) left_reflect(suffix[k], refl[k].u, 2.0 / refl[k].nn);
  }

  Matrix dm(n_, n_);
  for (std::size_t k = 0; k < n_; ++k) {
    const auto& r = refl[k];
    if (!r.active) continue;
    const Matrix& pk = prefix[k];
    const Matrix& sk = suffix[k + 1];
    const Vector pu = matvec(pk, r.u);
    const Vector su = matvec_transposed(sk, r.u);
    for (std::size_t m = 0; m < n_; ++m) {
      // ∂H/∂u_m = −(2/‖u‖²)(e_m uᵀ + u e_mᵀ) + (4u_m/‖u‖⁴) uuᵀ
      dm.fill(0.0);
      add_outer(dm, -2.0 / r.nn, pk.col(m), su);
      add_outer(dm, -2.0 / r.nn, pu, Vector(sk.row(m)));
      add_outer(dm, 4.0 * r.u[m] / (r.nn * r.nn), pu, su);
      for (std::size_t q = 0; q < nc; ++q) {
        const std::size_t c = (k * n_ + m) * nc + q;
        for (std::size_t j = 0; j < n_; ++j)
          for (std::size_t i = 0; i < n_; ++i) g(i + j * n_, c) = dm(i, j) * z[q];
      }
    }
  }
  return g;
}

Matrix orthofield_eval(const OrthoWrappedField& field, std::span<const double> coeffs,
                       double t) {
  return field.eval(coeffs, t);
}

}  // namespace nanode
