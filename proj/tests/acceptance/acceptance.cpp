// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   nanode_acceptance [output-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanode/grad.hpp"
#include "nanode/io.hpp"
#include "nanode/ortho.hpp"
#include "nanode/parallel.hpp"
#include "nanode/sensitivity.hpp"
#include "nanode/train.hpp"
#include "nanode_cli/commands.hpp"
#include "oracles.hpp"

using namespace nanode;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double ortho_defect(const Matrix& m) {
  return frobenius_norm(oracle::naive_product(oracle::naive_transpose(m), m) -
                        Matrix::identity(m.rows()));
}

Matrix random_orthogonal(std::size_t n, std::mt19937_64& rng) {
  HouseholderChain c;
  for (std::size_t k = 0; k < n; ++k) c.vectors.push_back(oracle::random_vector(n, rng));
  return chain_materialize(c);
}

// L(x) = Σ c_i x_i + ½‖x‖²
struct Quadratic {
  Vector c;
  double operator()(const Vector& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += c[i] * x[i] + 0.5 * x[i] * x[i];
    return s;
  }
};

// ------------------------------------------------------------------ 1

Outcome gradient_correctness() {
  Stopwatch sw;
  std::mt19937_64 rng(1001);
  std::vector<std::function<DynamicsFn(std::size_t, std::size_t, std::size_t)>> makers = {
      [](auto n, auto l, auto) { return DynamicsFn::autonomous(n, l, Activation::Tanh); },
      [](auto n, auto l, auto) { return DynamicsFn::append_time(n, l, Activation::Tanh); },
      [](auto n, auto l, auto) { return DynamicsFn::direct_hypernet(n, l, Activation::Tanh); },
      [](auto n, auto l, auto d) {
        return DynamicsFn::nanode(n, l, BasisShape::bucketed(d), Activation::Tanh);
      },
      [](auto n, auto l, auto d) {
        return DynamicsFn::nanode(n, l, BasisShape::polynomial(d, PolyFamily::Chebyshev),
                                  Activation::Tanh);
      },
      [](auto n, auto l, auto d) {
        return DynamicsFn::nanode(n, l, BasisShape::polynomial(d, PolyFamily::Legendre),
                                  Activation::Tanh);
      },
      [](auto n, auto l, auto d) {
        return DynamicsFn::nanode(n, l, BasisShape::polynomial(d, PolyFamily::Monomial),
                                  Activation::Tanh);
      },
      [](auto n, auto l, auto d) {
        return DynamicsFn::nanode(n, l, BasisShape::trigonometric(d, 2.0), Activation::Tanh);
      },
      [&rng](auto n, auto l, auto d) {
        return DynamicsFn::nanode(n, l, BasisShape::random_feature(d, rng), Activation::Tanh);
      },
      [](auto n, auto l, auto d) {
        return DynamicsFn::ortho_nanode(n, l, BasisShape::trigonometric(d), Activation::Tanh);
      },
      [](auto n, auto l, auto d) {
        return DynamicsFn::gated_mixture(n, 2, l, BasisShape::polynomial(d, PolyFamily::Chebyshev),
                                         Activation::Tanh);
      },
      [](auto n, auto l, auto) {
        return DynamicsFn::nanode(n, l, BasisShape::constant(), Activation::Identity);
      },
  };
  std::size_t instances = 0;
  double worst = 0.0;
  for (std::size_t rep = 0; rep < 5; ++rep) {
    for (const auto& make : makers) {
      const std::size_t n = uniform(rng, 1, 5), layers = uniform(rng, 1, 2),
                        d = uniform(rng, 1, 3), steps = uniform(rng, 4, 50);
      const DynamicsFn dyn = make(n, layers, d);
      const auto theta = oracle::random_params(dyn.param_count(), rng);
      const Vector x0 = oracle::random_vector(n, rng);
      const Quadratic loss{oracle::random_vector(n, rng)};
      const SolveSpec spec{rep % 2 ? Method::Euler : Method::RK4, 0.0, 1.0, steps, true};
      const Vector xt = integrate(dyn, x0, theta, spec).terminal;
      const GradResult g = grad_discrete(dyn, x0, theta, spec, loss.c + xt);
      const GradResult fd = grad_fd(dyn, x0, theta, spec, std::cref(loss));
      worst = std::max({worst, relative_error(g.d_theta, fd.d_theta),
                        relative_error(g.d_x0, fd.d_x0)});
      ++instances;
    }
  }
  const double t = sw.seconds();
  return {instances >= 50 && worst <= 1e-6 && t <= 120.0,
          fmt("%zu instances, max rel error %.2e (tol 1e-6), %.1f s", instances, worst, t)};
}

// ------------------------------------------------------------------ 2

Outcome adjoint_consistency() {
  std::mt19937_64 rng(1002);
  std::vector<DynamicsFn> dyns = {
      DynamicsFn::autonomous(3, 2, Activation::Tanh),
      DynamicsFn::append_time(3, 1, Activation::Tanh),
      DynamicsFn::nanode(4, 1, BasisShape::trigonometric(3, 2.0 * std::numbers::pi),
                         Activation::Tanh),
      DynamicsFn::nanode(3, 2, BasisShape::polynomial(3, PolyFamily::Chebyshev),
                         Activation::Tanh),
      DynamicsFn::ortho_nanode(4, 1, BasisShape::trigonometric(2, 2.0 * std::numbers::pi),
                               Activation::Tanh),
      DynamicsFn::gated_mixture(3, 2, 1, BasisShape::trigonometric(2), Activation::Tanh),
      DynamicsFn::direct_hypernet(3, 1, Activation::Tanh),
  };
  const std::size_t L = 100;
  double worst = 0.0;
  std::size_t max_adj_mem = 0;
  bool discrete_mem_ok = true;
  for (const auto& dyn : dyns) {
    const auto theta = oracle::random_params(dyn.param_count(), rng);
    const Vector x0 = oracle::random_vector(dyn.dim(), rng);
    const Vector dl = oracle::random_vector(dyn.dim(), rng);
    const SolveSpec spec{Method::RK4, 0.0, 1.0, L, true};
    const GradResult d = grad_discrete(dyn, x0, theta, spec, dl);
    const GradResult a = grad_adjoint(dyn, x0, theta, spec, dl);
    worst = std::max({worst, relative_error(a.d_theta, d.d_theta), relative_error(a.d_x0, d.d_x0)});
    max_adj_mem = std::max(max_adj_mem, a.activation_memory_units);
    discrete_mem_ok = discrete_mem_ok && d.activation_memory_units == L + 1;
  }
  return {worst <= 1e-3 && max_adj_mem <= 4 && discrete_mem_ok,
          fmt("%zu instances at RK4 L=100, max rel error %.2e (tol 1e-3), memory units adjoint %zu "
              "vs discrete %s",
              dyns.size(), worst, max_adj_mem, discrete_mem_ok ? "101" : "mismatch")};
}

// ------------------------------------------------------------------ 3

Outcome orthogonality_suite() {
  Stopwatch sw;
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  std::size_t checked = 0;
  auto record = [&](const Matrix& m) {
    worst = std::max(worst, ortho_defect(m));
    ++checked;
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t n : {2, 3, 5, 8, 16, 33, 64}) {
    // Householder chains of several lengths and both signs.
    for (std::size_t d : {std::size_t{1}, n / 2 + 1, n}) {
      HouseholderChain c;
      for (std::size_t k = 0; k < d; ++k) c.vectors.push_back(oracle::random_vector(n, rng));
      c.sign = d % 2 ? -1 : 1;
      record(chain_materialize(c));
    }
    // Givens walks.
    GivensWalk w;
    w.start = random_orthogonal(n, rng);
    for (std::size_t k = 0; k < std::min<std::size_t>(n, 6); ++k) {
      const std::size_t i = uniform(rng, 0, n - 2);
      w.pairs.emplace_back(i, uniform(rng, i + 1, n - 1));
    }
    // Geodesics and wrapped fields at 50 sampled times.
    const Matrix q = random_orthogonal(n, rng);
    const Matrix b = oracle::random_matrix(n, n, rng, 0.5);
    const Matrix omega = b - b.transpose();
    const OrthoWrappedField field(n, BasisShape::polynomial(3, PolyFamily::Chebyshev));
    const auto coeffs = oracle::random_params(field.param_count(), rng, 1.0);
    for (int s = 0; s < 50; ++s) {
      const double t = unit(rng);
      w.angle = 2.0 * std::numbers::pi * t;
      record(walk_materialize(w));
      record(geodesic(q, omega, 4.0 * t));
      record(field.eval(coeffs, t));
    }
  }
  const double t = sw.seconds();
  return {worst <= 1e-8 && t <= 30.0,
          fmt("%zu matrices up to N=64, max ||M^T M - I||_F %.2e (tol 1e-8), %.1f s", checked,
              worst, t)};
}

// ------------------------------------------------------------------ 4

Outcome givens_trig_fit() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  std::size_t walks = 0;
  for (std::size_t k = 1; k <= 6; ++k) {
    for (std::size_t n : {2, 4, 8}) {
      GivensWalk w;
      w.start = random_orthogonal(n, rng);
      for (std::size_t r = 0; r < k; ++r) {
        const std::size_t i = uniform(rng, 0, n - 2);
        w.pairs.emplace_back(i, uniform(rng, i + 1, n - 1));
      }
      const std::size_t samples = 4 * k + 1;
      Matrix design(samples, 2 * k + 1);
      std::vector<Matrix> mats;
      for (std::size_t s = 0; s < samples; ++s) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(s) / samples;
        w.angle = th;
        mats.push_back(walk_materialize(w));
        design(s, 0) = 1.0;
        for (std::size_t m = 1; m <= k; ++m) {
          design(s, m) = std::cos(m * th);
          design(s, k + m) = std::sin(m * th);
        }
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          Vector y(samples);
          for (std::size_t s = 0; s < samples; ++s) y[s] = mats[s](i, j);
          worst = std::max(worst, oracle::lsq_residual(design, y));
        }
      ++walks;
    }
  }
  return {worst <= 1e-8, fmt("%zu walks, k <= 6, N <= 8, max residual %.2e (tol 1e-8)", walks,
                              worst)};
}

// ------------------------------------------------------------------ 5

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

Outcome sensitivity_oracles() {
  // Scalar ẋ = θx.
  const auto scalar = DynamicsFn::autonomous(1, 1, Activation::Identity);
  const double th = 0.9, x0 = 1.3;
  const SensitivitySolve s = integrate_sensitivity(
      scalar, Vector{x0}, std::vector<double>{th, 0.0}, SolveSpec{Method::RK4, 0.0, 1.0, 200, true});
  double scalar_err = 0.0;
  for (std::size_t k = 1; k < s.times.size(); ++k) {
    const double t = s.times[k], want = x0 * t * std::exp(th * t);
    scalar_err = std::max(scalar_err, std::abs(s.snapshots[k](0, 0) - want) / std::abs(want));
  }
  // Commuting family A(t) = g(t)M.
  std::mt19937_64 rng(1005);
  const Matrix m = oracle::random_matrix(3, 3, rng, 0.5);
  auto g = [](double t) { return 1.0 + std::sin(3.0 * t) * std::exp(-t); };
  const STMSolve c = integrate_stm([&](double t) { return g(t) * m; }, 0.0, 2.0, 400);
  const double stm_err = max_abs_diff(c.phi, matexp(simpson(g, 0.0, 2.0, 4000) * m));
  // Skew-symmetric generator over [0, 10].
  const Matrix b = oracle::random_matrix(4, 4, rng);
  const Matrix k = b - b.transpose();
  const STMSolve sk = integrate_stm([&](double t) { return std::cos(t) * k; }, 0.0, 10.0, 1000);
  double skew_dev = 0.0;
  for (const auto& [t, n] : sk.norm_series) skew_dev = std::max(skew_dev, std::abs(n - 1.0));
  return {scalar_err <= 1e-6 && stm_err <= 1e-7 && skew_dev <= 1e-6,
          fmt("scalar rel error %.2e, commuting STM error %.2e, skew norm deviation %.2e",
              scalar_err, stm_err, skew_dev)};
}

// ------------------------------------------------------------------ 6

RunConfig reflection_config(Variant v, std::uint64_t seed) {
  RunConfig cfg;
  cfg.task = Task::Reflection1D;
  cfg.data.train_size = 64;
  cfg.data.test_size = 64;
  cfg.model.variant = v;
  cfg.model.state_dim = 1;
  cfg.model.layers = 1;
  cfg.model.activation = Activation::Identity;
  cfg.model.input_stem = Stem::Identity;
  cfg.model.output_stem = Stem::Identity;
  cfg.basis.kind = BasisKind::Trigonometric;
  cfg.basis.order = 2;
  cfg.solver.steps = 4;
  cfg.train.lr = 0.01;
  cfg.train.epochs = 2000;
  cfg.train.batch = 64;
  cfg.train.seed = seed;
  return cfg;
}

Outcome expressiveness(std::size_t threads) {
  Stopwatch sw;
  std::vector<double> auto_mse, nanode_mse;
  bool steps_ok = true;
  for (std::uint64_t seed : {0, 1, 2}) {
    const TrainResult a = train_run(reflection_config(Variant::Autonomous, seed), threads);
    const TrainResult n = train_run(reflection_config(Variant::Nanode, seed), threads);
    steps_ok = steps_ok && a.optimizer_steps == 2000 && n.optimizer_steps == 2000;
    auto_mse.push_back(a.metrics.diverged ? INFINITY : a.metrics.rows.back().train_loss);
    nanode_mse.push_back(n.metrics.diverged ? INFINITY : n.metrics.rows.back().train_loss);
  }
  const double t = sw.seconds();
  bool pass = steps_ok && t <= 300.0;
  for (std::size_t i = 0; i < 3; ++i) pass = pass && auto_mse[i] >= 0.1 && nanode_mse[i] <= 1e-2;
  return {pass, fmt("autonomous MSE %.3f/%.3f/%.3f (>= 0.1), d=2 MSE %.1e/%.1e/%.1e (<= 1e-2), "
                    "2000 steps, %.1f s",
                    auto_mse[0], auto_mse[1], auto_mse[2], nanode_mse[0], nanode_mse[1],
                    nanode_mse[2], t)};
}

// ------------------------------------------------------------------ 7, 8

inline constexpr double kOrderNoiseBand = 0.02;
inline constexpr double kSmoothnessMargin = 0.0;

RunConfig spirals_config(BasisKind kind, long order, std::uint64_t seed) {
  RunConfig cfg;
  cfg.task = Task::Spirals2D;
  cfg.data.train_size = 256;
  cfg.data.test_size = 256;
  cfg.model.state_dim = 4;
  cfg.model.layers = 1;
  cfg.basis.kind = kind;
  cfg.basis.order = order;
  cfg.solver.steps = 32;
  cfg.train.lr = 0.05;
  cfg.train.epochs = 200;
  cfg.train.batch = 64;
  cfg.train.seed = seed;
  return cfg;
}

struct SpiralRuns {
  std::map<long, std::vector<double>> train_acc;  // trigonometric, by order
  std::map<long, std::vector<double>> test_acc;
  std::vector<double> bucketed_test;
  double seconds_sweep = 0.0;
};

SpiralRuns spiral_runs(std::size_t threads) {
  SpiralRuns r;
  Stopwatch sw;
  for (long d : {1, 2, 4, 8})
    for (std::uint64_t seed : {0, 1, 2}) {
      const TrainResult t = train_run(spirals_config(BasisKind::Trigonometric, d, seed), threads);
      const MetricsRow& last = t.metrics.rows.back();
      r.train_acc[d].push_back(t.metrics.diverged ? 0.0 : last.train_acc);
      r.test_acc[d].push_back(t.metrics.diverged ? 0.0 : last.test_acc);
    }
  r.seconds_sweep = sw.seconds();
  for (std::uint64_t seed : {0, 1, 2}) {
    const TrainResult b = train_run(spirals_config(BasisKind::Bucketed, 4, seed), threads);
    r.bucketed_test.push_back(b.metrics.diverged ? 0.0 : b.metrics.rows.back().test_acc);
  }
  return r;
}

Outcome order_scaling(const SpiralRuns& r) {
  std::vector<double> med;
  for (const auto& [d, v] : r.train_acc) med.push_back(median(v));
  bool monotone = true;
  for (std::size_t i = 1; i < med.size(); ++i)
    monotone = monotone && med[i] >= med[i - 1] - kOrderNoiseBand;
  const double gap = med.back() - med.front();
  return {monotone && gap >= 0.05 && r.seconds_sweep <= 1200.0,
          fmt("median train acc d=1 %.3f, d=2 %.3f, d=4 %.3f, d=8 %.3f (band %.2f), gap %.1f "
              "points, %.1f s",
              med[0], med[1], med[2], med[3], kOrderNoiseBand, 100.0 * gap, r.seconds_sweep)};
}

Outcome smoothness(const SpiralRuns& r, const fs::path& out) {
  const double t = median(r.test_acc.at(4)), b = median(r.bucketed_test);
  json j;
  j["criterion"] = "smoothness";
  j["task"] = "spirals2d";
  j["steps"] = 32;
  j["order"] = 4;
  j["trigonometric_test_acc"] = r.test_acc.at(4);
  j["bucketed_test_acc"] = r.bucketed_test;
  j["trigonometric_median"] = t;
  j["bucketed_median"] = b;
  j["margin"] = kSmoothnessMargin;
  j["pass"] = t >= b + kSmoothnessMargin;
  write_text_file(out / "smoothness" / "summary.json", j.dump(2) + "\n");
  return {t >= b + kSmoothnessMargin,
          fmt("median test acc trigonometric %.3f vs bucketed %.3f (margin %.2f)", t, b,
              kSmoothnessMargin)};
}

// ------------------------------------------------------------------ 9

std::vector<double> csv_column(const std::string& csv, const std::string& name) {
  std::istringstream in(csv);
  std::string line, cell;
  std::getline(in, line);
  std::size_t col = 0;
  {
    std::istringstream h(line);
    for (std::size_t i = 0; std::getline(h, cell, ','); ++i)
      if (cell == name) col = i;
  }
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::istringstream r(line);
    for (std::size_t i = 0; std::getline(r, cell, ','); ++i)
      if (i == col) out.push_back(std::stod(cell));
  }
  return out;
}

std::string stability_config(bool ortho) {
  json j;
  j["task"] = "spirals2d";
  j["model"] = {{"N", 8}, {"layers", 1}};
  j["basis"] = {{"kind", "polynomial"}, {"family", "chebyshev"}, {"order", 4},
                {"init", {{"mode", "normal"}, {"scale", 1.0}}}};
  j["ortho"] = {{"enabled", ortho}};
  j["solver"] = {{"method", "rk4"}, {"steps", 32}};
  return j.dump(2) + "\n";
}

Outcome stability_contrast(const fs::path& out) {
  std::ostringstream sink;
  auto run = [&](bool ortho) {
    const fs::path dir = out / (ortho ? "stability_ortho" : "stability_raw");
    write_text_file(dir / "config.json", stability_config(ortho));
    cli::CommonOptions o;
    o.config_path = (dir / "config.json").string();
    o.out_dir = dir.string();
    o.quiet = true;
    o.out = o.err = &sink;
    const int code = cli::cmd_stability(o);
    return std::pair{code, dir};
  };
  const auto [raw_code, raw_dir] = run(false);
  const auto [orth_code, orth_dir] = run(true);
  if (raw_code != 0 || orth_code != 0) return {false, "cmd_stability failed: " + sink.str()};
  const auto raw = json::parse(read_text_file(raw_dir / "stability.json"));
  const auto orth = json::parse(read_text_file(orth_dir / "stability.json"));
  const auto series = csv_column(read_text_file(orth_dir / "stability.csv"), "norm_W");
  double dev = 0.0;
  for (double v : series) dev = std::max(dev, std::abs(v - 1.0));
  const bool orth_ok = !orth["diverged"].get<bool>() && !series.empty() && dev <= 1e-8;
  return {orth_ok, fmt("wrapped: diverged %s, %zu rows, max |norm_W - 1| %.1e (tol 1e-8); raw: "
                       "max norm_W %.2f, diverged %s",
                       orth["diverged"].get<bool>() ? "yes" : "no", series.size(), dev,
                       raw["max_norm_W"].get<double>(), raw["diverged"].get<bool>() ? "yes" : "no")};
}

// ------------------------------------------------------------------ 10

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name == "timing.csv" || name == "orthobench.csv") continue;
    files[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
  }
  return files;
}

Outcome determinism(const fs::path& out) {
  const fs::path dir = out / "determinism";
  json cfg;
  cfg["task"] = "annuli2d";
  cfg["data"] = {{"train_size", 64}, {"test_size", 32}};
  cfg["model"] = {{"N", 3}};
  cfg["basis"] = {{"kind", "trigonometric"}, {"order", 2}};
  cfg["solver"] = {{"steps", 16}};
  cfg["train"] = {{"epochs", 3}, {"batch", 16}, {"lr", 0.01}, {"seed", 7}};
  const std::string cfg_path = (out / "determinism_config.json").string();
  write_text_file(cfg_path, cfg.dump(2) + "\n");
  std::ostringstream sink;
  auto run_all = [&](std::size_t threads) {
    fs::remove_all(dir);
    auto opts = [&](const std::string& sub) {
      cli::CommonOptions o;
      o.config_path = cfg_path;
      o.out_dir = (dir / sub).string();
      o.quiet = true;
      o.threads = threads;
      o.out = o.err = &sink;
      return o;
    };
    int codes = 0;
    codes |= cli::cmd_train(opts("train"));
    codes |= cli::cmd_gradcheck(opts("gradcheck"));
    codes |= cli::cmd_stability(opts("stability"));
    codes |= cli::cmd_stability(opts("stability_ck"), (dir / "train" / "checkpoint.json").string());
    codes |= cli::cmd_datagen(opts("datagen"));
    codes |= cli::cmd_orthobench(opts("orthobench"), cli::OrthobenchOptions{32, 8, 100, 7});
    return std::pair{codes, snapshot(dir)};
  };
  const auto [c1, first] = run_all(1);
  const auto [c2, second] = run_all(2);
  std::size_t differing = 0;
  for (const auto& [name, text] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != text) ++differing;
  }
  const bool pass = c1 == 0 && c2 == 0 && first.size() == second.size() && differing == 0 &&
                    first.size() >= 10;
  return {pass, fmt("%zu artifacts from train, gradcheck, stability, datagen, orthobench compared "
                    "byte-for-byte across two runs (1 and 2 threads), %zu differ",
                    first.size(), differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out);
  const std::size_t threads = thread_budget();

  bool all = true;
  json report = json::array();
  auto emit = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.details.c_str());
    std::fflush(stdout);
    all = all && o.pass;
    report.push_back({{"criterion", id}, {"name", name}, {"pass", o.pass}, {"details", o.details}});
  };
  auto guarded = [](auto&& fn) -> Outcome {
    try {
      return fn();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  emit(1, "gradient correctness", guarded([] { return gradient_correctness(); }));
  emit(2, "adjoint consistency and memory", guarded([] { return adjoint_consistency(); }));
  emit(3, "orthogonality suite", guarded([] { return orthogonality_suite(); }));
  emit(4, "givens walk trigonometric fit", guarded([] { return givens_trig_fit(); }));
  emit(5, "sensitivity and transition oracles", guarded([] { return sensitivity_oracles(); }));
  emit(6, "expressiveness separation", guarded([&] { return expressiveness(threads); }));
  SpiralRuns spirals;
  bool spirals_ok = true;
  std::string spirals_error;
  try {
    spirals = spiral_runs(threads);
  } catch (const std::exception& e) {
    spirals_ok = false;
    spirals_error = std::string("exception: ") + e.what();
  }
  emit(7, "order scaling", spirals_ok ? order_scaling(spirals) : Outcome{false, spirals_error});
  emit(8, "smoothness comparison",
       spirals_ok ? guarded([&] { return smoothness(spirals, out); })
                  : Outcome{false, spirals_error});
  emit(9, "stability contrast", guarded([&] { return stability_contrast(out); }));
  emit(10, "determinism", guarded([&] { return determinism(out); }));

  write_text_file(out / "acceptance.json", report.dump(2) + "\n");
  return all ? 0 : 1;
}
