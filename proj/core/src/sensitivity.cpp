#include "nanode/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nanode/io.hpp"

namespace nanode {

namespace {

// Packs x, then the matrices row-major, into one flat state.
Vector pack(const Vector& x, std::initializer_list<const Matrix*> mats) {
  std::size_t n = x.dim();
  for (const Matrix* m : mats) n += m->rows() * m->cols();
  Vector y(n);
  std::size_t o = 0;
  for (double v : x) y[o++] = v;
  for (const Matrix* m : mats)
    for (double v : m->span()) y[o++] = v;
  return y;
}

Vector take_vector(const Vector& y, std::size_t offset, std::size_t n) {
  return Vector(y.span().subspan(offset, n));
}

Matrix take_matrix(const Vector& y, std::size_t offset, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = y[offset + i];
  return m;
}

double skew_defect(const Matrix& a) {
  const double na = frobenius_norm(a);
  if (na == 0.0) return 0.0;
  return frobenius_norm(a + a.transpose()) / na;
}

}  // namespace

// ---------------------------------------------------------------- S(t)

SensitivitySolve integrate_sensitivity(const DynamicsFn& dyn, const Vector& x0,
                                       std::span<const double> theta,
                                       const SolveSpec& spec) {
  spec.validate();
  const std::size_t n = dyn.dim();
  const std::size_t k = dyn.param_count();
  const SliceCache cache(dyn, theta, spec);
  const double h = spec.step();

  auto rhs = [&](std::size_t s, const Vector& y) {
    const Slice& sl = cache.at(s);
    const Vector x = take_vector(y, 0, n);
    const Matrix sm = take_matrix(y, n, n, k);
    const Vector f = dyn.eval(sl, x);
    const Matrix a = dyn.jac_x(sl, x);
    Matrix ds = a * sm;
    ds += dyn.jac_theta(x, spec.stage_time(s), theta);
    return pack(f, {&ds});
  };

  SensitivitySolve out;
  Matrix s0(n, k);
  Vector y = pack(x0, {&s0});
  out.times.push_back(spec.grid_time(0));
  out.snapshots.push_back(s0);
  for (std::size_t step = 0; step < spec.steps; ++step) {
    y = method_step(spec.method, y, h, 2 * step, 1, rhs);
    check_divergence(y, static_cast<long>(step + 1), spec.grid_time(step + 1));
    out.times.push_back(spec.grid_time(step + 1));
    out.snapshots.push_back(take_matrix(y, n, n, k));
  }
  out.terminal_x = take_vector(y, 0, n);
  out.terminal_s = out.snapshots.back();
  return out;
}

// ---------------------------------------------------------------- STM

STMSolve integrate_stm(const MatrixFn& a_of_t, double t0, double t1, std::size_t steps) {
  SolveSpec spec{Method::RK4, t0, t1, steps, true};
  spec.validate();
  const Matrix a0 = a_of_t(t0);
  NANODE_REQUIRE(a0.square(), "state transition generator must be square");
  const std::size_t n = a0.rows();

  // A(t) is sampled once per stage time.
  std::vector<Matrix> gen(spec.stage_count());
  for (std::size_t s = 0; s < gen.size(); ++s) {
    gen[s] = s == 0 ? a0 : a_of_t(spec.stage_time(s));
    NANODE_REQUIRE(gen[s].rows() == n && gen[s].cols() == n,
                   "state transition generator changed shape");
    NANODE_REQUIRE(all_finite(gen[s].span()), "state transition generator is not finite");
  }

  auto rhs = [&](std::size_t s, const Vector& y) {
    const Matrix m = take_matrix(y, 0, n, n);
    const Matrix d = gen[s] * m;
    return Vector(d.span());
  };

  STMSolve out;
  out.t0 = t0;
  out.t1 = t1;
  const Matrix eye = Matrix::identity(n);
  Vector y(eye.span());
  out.norm_series.emplace_back(t0, 1.0);
  const double h = spec.step();
  for (std::size_t k = 0; k < steps; ++k) {
    y = method_step(Method::RK4, y, h, 2 * k, 1, rhs);
    check_divergence(y, static_cast<long>(k + 1), spec.grid_time(k + 1));
    out.norm_series.emplace_back(spec.grid_time(k + 1), spectral_norm(take_matrix(y, 0, n, n)));
  }
  out.phi = take_matrix(y, 0, n, n);
  return out;
}

// ---------------------------------------------------------------- report

double SensitivityReport::max_norm_w() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.norm_w);
  return m;
}

std::string SensitivityReport::to_csv() const {
  std::ostringstream os;
  os << "t,norm_S,norm_A,norm_Phi,skew_defect,norm_B,norm_W\n";
  for (const auto& r : rows)
    os << format_double(r.t) << ',' << format_double(r.norm_s) << ','
       << format_double(r.norm_a) << ',' << format_double(r.norm_phi) << ','
       << format_double(r.skew_defect) << ',' << format_double(r.norm_b) << ','
       << format_double(r.norm_w) << '\n';
  return os.str();
}

SensitivityReport gradient_flow_report(const DynamicsFn& dyn, const Vector& x0,
                                       std::span<const double> theta,
                                       const SolveSpec& spec) {
  spec.validate();
  const std::size_t n = dyn.dim();
  const std::size_t k = dyn.param_count();
  const double h = spec.step();
  SensitivityReport report;

  try {
    const SliceCache cache(dyn, theta, spec);
    auto rhs = [&](std::size_t s, const Vector& y) {
      const Slice& sl = cache.at(s);
      const Vector x = take_vector(y, 0, n);
      const Matrix sm = take_matrix(y, n, n, k);
      const Matrix phi = take_matrix(y, n + n * k, n, n);
      const Vector f = dyn.eval(sl, x);
      const Matrix a = dyn.jac_x(sl, x);
      Matrix ds = a * sm;
      ds += dyn.jac_theta(x, spec.stage_time(s), theta);
      const Matrix dphi = a * phi;
      return pack(f, {&ds, &dphi});
    };

    auto record = [&](std::size_t step, const Vector& y) {
      const Slice& sl = cache.at(2 * step);
      const Vector x = take_vector(y, 0, n);
      const Matrix a = dyn.jac_x(sl, x);
      SensitivityRow row;
      row.t = spec.grid_time(step);
      row.norm_s = spectral_norm(take_matrix(y, n, n, k));
      row.norm_a = spectral_norm(a);
      row.norm_phi = spectral_norm(take_matrix(y, n + n * k, n, n));
      row.skew_defect = skew_defect(a);
      row.norm_b = spectral_norm(dyn.jac_theta(x, row.t, theta));
      for (const auto& st : sl.stacks)
        for (const auto& layer : st) row.norm_w = std::max(row.norm_w, spectral_norm(layer.w));
      report.rows.push_back(row);
    };

    Matrix s0(n, k);
    const Matrix phi0 = Matrix::identity(n);
    Vector y = pack(x0, {&s0, &phi0});
    record(0, y);
    for (std::size_t step = 0; step < spec.steps; ++step) {
      y = method_step(spec.method, y, h, 2 * step, 1, rhs);
      check_divergence(y, static_cast<long>(step + 1), spec.grid_time(step + 1));
      record(step + 1, y);
    }
  } catch (const DivergenceError& e) {
    report.diverged = true;
    report.divergence_message = e.what();
  } catch (const NumericOverflow& e) {
    report.diverged = true;
    report.divergence_message = e.what();
  }
  return report;
}

}  // namespace nanode
