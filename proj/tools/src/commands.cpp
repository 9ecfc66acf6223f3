#include "nanode_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nanode/io.hpp"
#include "nanode/ortho.hpp"
#include "nanode/sensitivity.hpp"
#include "nanode/train.hpp"

namespace nanode::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ostream& out_of(const CommonOptions& o) { return o.out ? *o.out : std::cout; }
std::ostream& err_of(const CommonOptions& o) { return o.err ? *o.err : std::cerr; }

fs::path output_dir(const RunConfig& cfg) { return fs::path(cfg.output.directory); }

struct Worst {
  double error = 0.0;
  std::size_t index = 0;
};

Worst compare(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1e-12);
  Worst w;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = std::abs(a[i] - b[i]) / scale;
    if (e > w.error) w = {e, i};
  }
  return w;
}

GradcheckRow make_row(std::string name, const Worst& w, double tol) {
  return GradcheckRow{std::move(name), w.error, tol, w.index, w.error <= tol};
}

}  // namespace

std::optional<RunConfig> resolve_config(const CommonOptions& opt) {
  if (opt.config_path.empty()) {
    err_of(opt) << "error: --config is required\n";
    return std::nullopt;
  }
  try {
    RunConfig cfg = load_config(opt.config_path);
    if (opt.seed) cfg.train.seed = *opt.seed;
    if (!opt.out_dir.empty()) cfg.output.directory = opt.out_dir;
    if (auto v = validate_config(cfg); !v.empty()) throw ConfigError(std::move(v));
    return cfg;
  } catch (const ConfigError& e) {
    err_of(opt) << "invalid config '" << opt.config_path << "':\n";
    for (const auto& v : e.violations()) err_of(opt) << "  - " << v << '\n';
    return std::nullopt;
  }
}

// ---------------------------------------------------------------- train

int cmd_train(const CommonOptions& opt) {
  const auto cfg = resolve_config(opt);
  if (!cfg) return kExitInvalidConfig;
  std::ostream& out = out_of(opt);
  auto progress = [&](const MetricsRow& r) {
    if (opt.quiet) return;
    out << "epoch " << r.epoch << "  train_loss " << r.train_loss << "  test_loss "
        << r.test_loss << "  train_acc " << r.train_acc << "  test_acc " << r.test_acc << '\n';
  };
  const TrainResult r = train_run(*cfg, opt.threads, progress);
  const fs::path dir = output_dir(*cfg);
  write_text_file(dir / "metrics.csv", r.metrics.to_csv());
  write_text_file(dir / "timing.csv", r.metrics.timing_csv());
  write_text_file(dir / "checkpoint.json", save_checkpoint(r.model, *cfg, &r.metrics));
  write_text_file(dir / "summary.json", summary_json(r));
  if (r.metrics.diverged) {
    err_of(opt) << "run diverged: " << r.metrics.divergence_message << '\n';
    return kExitDiverged;
  }
  if (!opt.quiet) out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

std::vector<GradcheckRow> run_gradcheck(const RunConfig& cfg, const GradcheckOptions& g) {
  NanodeModel model = make_model(cfg);
  const ParamView& fv = model.layout().find("flow");
  {
    std::mt19937_64 rng(cfg.train.seed + 0x5eedULL);
    std::normal_distribution<double> jitter(0.0, 0.1);
    for (double& v : fv.of(model.theta())) v += jitter(rng);
  }
  const Batch probe = gen_samples(cfg.task, cfg.train.seed + 17, 4, cfg.data.noise);
  const LossSpec loss = make_loss(cfg);
  std::vector<GradcheckRow> rows;

  const LossGrad discrete = model.loss_and_grad(probe, loss, GradMethod::Discrete);
  Vector fd(model.param_count());
  {
    auto theta = model.theta();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double orig = theta[i];
      const double h = 1e-6 * std::max(1.0, std::abs(orig));
      theta[i] = orig + h;
      const double up = model.loss(probe, loss);
      theta[i] = orig - h;
      const double down = model.loss(probe, loss);
      theta[i] = orig;
      fd[i] = (up - down) / (2.0 * h);
    }
  }
  rows.push_back(make_row("discrete-vs-fd", compare(discrete.grad.span(), fd.span()),
                          kDiscreteFdTolerance));

  const LossGrad adjoint = model.loss_and_grad(probe, loss, GradMethod::Adjoint);
  rows.push_back(make_row("adjoint-vs-discrete",
                          compare(adjoint.grad.span(), discrete.grad.span()), kAdjointTolerance));

  // Pointwise Jacobians of the flow's right-hand side.
  const DynamicsFn& flow = model.flow();
  std::vector<double> theta(fv.of(model.theta()).begin(), fv.of(model.theta()).end());
  const double T = cfg.solver.horizon;
  std::vector<double> jt, jt_fd, jx, jx_fd;
  const double times[] = {0.13 * T, 0.5 * T, 0.87 * T};
  for (std::size_t k = 0; k < 3; ++k) {
    const Vector x = model.embed(probe.inputs[k]);
    const double t = times[k];
    Matrix a = flow.jac_theta(x, t, theta);
    if (g.corrupt_jac_theta && k == 0 && a.cols() > 0) a(0, 0) += 1.0;
    Matrix b(a.rows(), a.cols());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double orig = theta[j];
      const double h = 1e-6 * std::max(1.0, std::abs(orig));
      theta[j] = orig + h;
      const Vector up = flow.eval_f(x, t, theta);
      theta[j] = orig - h;
      const Vector down = flow.eval_f(x, t, theta);
      theta[j] = orig;
      for (std::size_t i = 0; i < up.dim(); ++i) b(i, j) = (up[i] - down[i]) / (2.0 * h);
    }
    jt.insert(jt.end(), a.span().begin(), a.span().end());
    jt_fd.insert(jt_fd.end(), b.span().begin(), b.span().end());

    const Matrix ax = flow.jac_x(x, t, theta);
    Matrix bx(ax.rows(), ax.cols());
    Vector xp = x;
    for (std::size_t j = 0; j < x.dim(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      xp[j] = x[j] + h;
      const Vector up = flow.eval_f(xp, t, theta);
      xp[j] = x[j] - h;
      const Vector down = flow.eval_f(xp, t, theta);
      xp[j] = x[j];
      for (std::size_t i = 0; i < up.dim(); ++i) bx(i, j) = (up[i] - down[i]) / (2.0 * h);
    }
    jx.insert(jx.end(), ax.span().begin(), ax.span().end());
    jx_fd.insert(jx_fd.end(), bx.span().begin(), bx.span().end());
  }
  rows.push_back(make_row("jac_theta-vs-fd", compare(jt, jt_fd), kJacobianTolerance));
  rows.push_back(make_row("jac_x-vs-fd", compare(jx, jx_fd), kJacobianTolerance));
  return rows;
}

std::string gradcheck_csv(const std::vector<GradcheckRow>& rows) {
  std::ostringstream os;
  os << "check,max_rel_error,tolerance,worst_index,pass\n";
  for (const auto& r : rows)
    os << r.check << ',' << format_double(r.max_rel_error) << ',' << format_double(r.tolerance)
       << ',' << r.worst_index << ',' << (r.pass ? 1 : 0) << '\n';
  return os.str();
}

int cmd_gradcheck(const CommonOptions& opt, const GradcheckOptions& g) {
  const auto cfg = resolve_config(opt);
  if (!cfg) return kExitInvalidConfig;
  const auto rows = run_gradcheck(*cfg, g);
  write_text_file(output_dir(*cfg) / "gradcheck.csv", gradcheck_csv(rows));
  std::ostream& out = out_of(opt);
  const GradcheckRow* worst = nullptr;
  for (const auto& r : rows) {
    if (!opt.quiet)
      out << r.check << "  max_rel_error " << r.max_rel_error << "  tolerance " << r.tolerance
          << "  " << (r.pass ? "ok" : "FAIL") << '\n';
    if (!r.pass && (!worst || r.max_rel_error / r.tolerance > worst->max_rel_error / worst->tolerance))
      worst = &r;
  }
  if (worst) {
    err_of(opt) << "gradcheck failed: " << worst->check << " error " << worst->max_rel_error
                << " at index " << worst->worst_index << " exceeds " << worst->tolerance << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- stability

int cmd_stability(const CommonOptions& opt, const std::string& checkpoint) {
  const auto cfg = resolve_config(opt);
  if (!cfg) return kExitInvalidConfig;
  std::optional<NanodeModel> model;
  if (checkpoint.empty()) {
    model.emplace(make_model(*cfg));
  } else {
    const Checkpoint ck = parse_checkpoint(read_text_file(checkpoint));
    model.emplace(load_model(ck));
  }
  const Batch probe = gen_samples(cfg->task, cfg->train.seed, 2, cfg->data.noise);
  const Vector x0 = model->embed(probe.inputs[0]);
  const auto theta = model->layout().find("flow").of(model->theta());
  const SensitivityReport rep = gradient_flow_report(model->flow(), x0, theta, model->solve());

  double max_s = 0.0, max_phi = 0.0, max_a = 0.0, max_b = 0.0;
  for (const auto& r : rep.rows) {
    max_s = std::max(max_s, r.norm_s);
    max_phi = std::max(max_phi, r.norm_phi);
    max_a = std::max(max_a, r.norm_a);
    max_b = std::max(max_b, r.norm_b);
  }
  json j;
  j["diverged"] = rep.diverged;
  j["divergence_message"] = rep.divergence_message;
  j["rows"] = rep.rows.size();
  j["max_norm_W"] = rep.max_norm_w();
  j["max_norm_A"] = max_a;
  j["max_norm_B"] = max_b;
  j["max_norm_S"] = max_s;
  j["max_norm_Phi"] = max_phi;
  const fs::path dir = output_dir(*cfg);
  write_text_file(dir / "stability.csv", rep.to_csv());
  write_text_file(dir / "stability.json", j.dump(2) + "\n");
  if (!opt.quiet) {
    out_of(opt) << "rows " << rep.rows.size() << "  max_norm_W " << rep.max_norm_w()
                << "  max_norm_Phi " << max_phi << "  diverged " << (rep.diverged ? "yes" : "no")
                << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- orthobench

OrthobenchResult run_orthobench(const OrthobenchOptions& o) {
  NANODE_REQUIRE(o.n > 0 && o.d > 0 && o.repeats > 0, "orthobench needs positive N, d, repeats");
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  HouseholderChain chain;
  for (std::size_t k = 0; k < o.d; ++k) {
    Vector u(o.n);
    for (auto& v : u) v = normal(rng);
    chain.vectors.push_back(std::move(u));
  }
  const Matrix dense = chain_materialize(chain);
  Vector x(o.n);
  for (auto& v : x) v = normal(rng);

  OpCounter chain_ops, dense_ops;
  const Vector y_chain = chain_apply(chain, x, &chain_ops);
  const Vector y_dense = dense_apply(dense, x, &dense_ops);

  using clock = std::chrono::steady_clock;
  auto time_ns = [&](auto&& apply) {
    double sink = 0.0;
    const auto start = clock::now();
    for (std::size_t r = 0; r < o.repeats; ++r) sink += apply()[r % o.n];
    const auto ns = std::chrono::duration<double, std::nano>(clock::now() - start).count();
    volatile double keep = sink;
    (void)keep;
    return ns / static_cast<double>(o.repeats);
  };
  OrthobenchResult res;
  res.max_output_diff = max_abs_diff(y_chain, y_dense);
  res.rows.push_back({o.n, o.d, "householder_chain",
                      time_ns([&] { return chain_apply(chain, x); }), chain_ops.flops});
  res.rows.push_back({o.n, o.d, "dense_matvec", time_ns([&] { return dense_apply(dense, x); }),
                      dense_ops.flops});
  return res;
}

int cmd_orthobench(const CommonOptions& opt, const OrthobenchOptions& o) {
  const OrthobenchResult res = run_orthobench(o);
  std::ostringstream os;
  os << "N,d,method,ns_per_apply,flop_count\n";
  for (const auto& r : res.rows)
    os << r.n << ',' << r.d << ',' << r.method << ',' << format_double(r.ns_per_apply) << ','
       << r.flop_count << '\n';
  const fs::path dir = opt.out_dir.empty() ? fs::path("runs/orthobench") : fs::path(opt.out_dir);
  write_text_file(dir / "orthobench.csv", os.str());
  if (!opt.quiet) out_of(opt) << os.str() << "max_output_diff " << res.max_output_diff << '\n';
  if (!(res.max_output_diff <= 1e-10)) {
    err_of(opt) << "chain and dense outputs differ by " << res.max_output_diff << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- datagen

int cmd_datagen(const CommonOptions& opt) {
  const auto cfg = resolve_config(opt);
  if (!cfg) return kExitInvalidConfig;
  const Dataset d = gen_dataset(cfg->task, cfg->train.seed,
                                static_cast<std::size_t>(cfg->data.train_size),
                                static_cast<std::size_t>(cfg->data.test_size), cfg->data.noise);
  const fs::path dir = output_dir(*cfg);
  write_text_file(dir / "train.csv", dataset_csv(d.task, d.train));
  write_text_file(dir / "test.csv", dataset_csv(d.task, d.test));
  if (!opt.quiet)
    out_of(opt) << "wrote " << d.train.size() << " train and " << d.test.size()
                << " test samples to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace nanode::cli
