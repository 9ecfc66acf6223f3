#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "nanode/train.hpp"
#include "oracles.hpp"

using namespace nanode;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.task = Task::Spirals2D;
  cfg.data.train_size = 32;
  cfg.data.test_size = 16;
  cfg.model.state_dim = 3;
  cfg.solver.steps = 8;
  cfg.train.epochs = 3;
  cfg.train.batch = 8;
  cfg.train.lr = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("Adam first step moves each coordinate by lr against the gradient sign") {
  OptimState opt(OptimKind::Adam, 0.1, 3);
  std::vector<double> theta{1.0, 2.0, 3.0};
  adam_step(opt, theta, Vector{0.5, -2.0, 0.0});
  CHECK(theta[0] == doctest::Approx(0.9));
  CHECK(theta[1] == doctest::Approx(2.1));
  CHECK(theta[2] == 3.0);
  CHECK(opt.step == 1);
}

TEST_CASE("Adam bias correction with a constant gradient") {
  OptimState opt(OptimKind::Adam, 0.01, 1);
  std::vector<double> theta{0.0};
  for (int i = 0; i < 50; ++i) adam_step(opt, theta, Vector{3.0});
  // m̂ = v̂^{1/2} = 3 every step, so each update is lr·3/(3+ε).
  CHECK(theta[0] == doctest::Approx(-50 * 0.01 * 3.0 / (3.0 + 1e-8)).epsilon(1e-10));
}

TEST_CASE("Adam with a zero gradient leaves parameters unchanged") {
  OptimState opt(OptimKind::Adam, 0.1, 2);
  std::vector<double> theta{0.3, -0.2};
  for (int i = 0; i < 20; ++i) adam_step(opt, theta, Vector{0.0, 0.0});
  CHECK(theta == std::vector<double>{0.3, -0.2});
  CHECK(opt.step == 20);
  CHECK(opt.m.size() == 2);
  CHECK(opt.v.size() == 2);
}

TEST_CASE("Adam decreases a quadratic") {
  OptimState opt(OptimKind::Adam, 0.1, 1);
  std::vector<double> theta{2.0};
  double prev = 0.5 * theta[0] * theta[0];
  for (int i = 0; i < 3; ++i) {
    adam_step(opt, theta, Vector{theta[0]});
    const double l = 0.5 * theta[0] * theta[0];
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("SGD and non-finite gradients") {
  OptimState opt(OptimKind::SGD, 0.5, 2);
  std::vector<double> theta{1.0, 1.0};
  sgd_step(opt, theta, Vector{2.0, -1.0});
  CHECK(theta == std::vector<double>{0.0, 1.5});
  CHECK_THROWS_AS(optimizer_step(opt, theta, Vector{NAN, 0.0}), DivergenceError);
}

TEST_CASE("datasets are deterministic and well formed") {
  for (Task t : {Task::Reflection1D, Task::Annuli2D, Task::Spirals2D}) {
    CAPTURE(to_string(t));
    const Dataset a = gen_dataset(t, 7, 40, 20);
    const Dataset b = gen_dataset(t, 7, 40, 20);
    const Dataset c = gen_dataset(t, 8, 40, 20);
    CHECK(dataset_csv(t, a.train) == dataset_csv(t, b.train));
    CHECK(dataset_csv(t, a.test) == dataset_csv(t, b.test));
    CHECK(dataset_csv(t, a.train) != dataset_csv(t, c.train));
    CHECK(a.train.size() == 40);
    std::set<std::vector<double>> seen;
    for (const auto& x : a.train.inputs) seen.insert(std::vector<double>(x.begin(), x.end()));
    for (const auto& x : a.test.inputs) CHECK(seen.count(std::vector<double>(x.begin(), x.end())) == 0);
    CHECK(a.test.size() == 20);
    const TaskInfo info = task_info(t);
    for (const auto& x : a.train.inputs) CHECK(x.dim() == info.input_dim);
    if (info.classification) {
      std::size_t ones = 0;
      for (std::size_t l : a.train.labels) ones += l;
      CHECK(ones == 20);
    }
  }
}

TEST_CASE("task geometry") {
  const Batch r = gen_samples(Task::Reflection1D, 3, 200);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(std::abs(r.inputs[i][0]) >= 0.05);
    CHECK(std::abs(r.inputs[i][0]) <= 1.0);
    CHECK(r.targets[i][0] == -r.inputs[i][0]);
  }
  const Batch a = gen_samples(Task::Annuli2D, 3, 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double rad = std::hypot(a.inputs[i][0], a.inputs[i][1]);
    if (a.labels[i] == 0) CHECK(rad <= 1.0);
    else CHECK((rad >= 1.5 && rad <= 2.5));
  }
}

TEST_CASE("a zero-epoch run evaluates once") {
  RunConfig cfg = tiny_config();
  cfg.train.epochs = 0;
  const TrainResult r = train_run(cfg);
  REQUIRE(r.metrics.rows.size() == 1);
  CHECK(r.metrics.rows[0].epoch == 0);
  CHECK(r.optimizer_steps == 0);
  CHECK_FALSE(r.metrics.diverged);
}

TEST_CASE("training is deterministic across runs and threads") {
  const RunConfig cfg = tiny_config();
  const TrainResult a = train_run(cfg, 1);
  const TrainResult b = train_run(cfg, 3);
  CHECK(a.metrics.to_csv() == b.metrics.to_csv());
  CHECK(summary_json(a) == summary_json(b));
  CHECK(a.optimizer_steps == 12);
  CHECK(a.metrics.rows.size() == 4);
  CHECK(a.metrics.rows.back().train_loss < a.metrics.rows.front().train_loss);
  CHECK(a.metrics.to_csv().rfind(
            "epoch,train_loss,test_loss,train_acc,test_acc,grad_norm,activation_memory_units\n",
            0) == 0);
  RunConfig other = cfg;
  other.train.seed = 1;
  CHECK(train_run(other).metrics.to_csv() != a.metrics.to_csv());
}

TEST_CASE("memory units follow the gradient method") {
  RunConfig cfg = tiny_config();
  cfg.train.epochs = 1;
  CHECK(train_run(cfg).metrics.rows.back().activation_memory_units == 9);
  cfg.grad.method = GradMethod::Adjoint;
  CHECK(train_run(cfg).metrics.rows.back().activation_memory_units == kAdjointMemoryUnits);
}

TEST_CASE("divergence is flagged and earlier rows kept") {
  RunConfig cfg = tiny_config();
  cfg.basis.init_mode = InitMode::Normal;
  cfg.basis.init_scale = 1e6;
  cfg.model.activation = Activation::Identity;
  cfg.solver.method = Method::Euler;
  const TrainResult r = train_run(cfg);
  CHECK(r.metrics.diverged);
  CHECK_FALSE(r.metrics.divergence_message.empty());
}

TEST_CASE("checkpoint round trip is bit-identical") {
  const RunConfig cfg = tiny_config();
  const TrainResult r = train_run(cfg);
  const std::string text = save_checkpoint(r.model, cfg, &r.metrics);
  const Checkpoint ck = parse_checkpoint(text);
  CHECK(ck.format_version == kCheckpointVersion);
  const NanodeModel m = load_model(ck);
  CHECK(std::equal(m.theta().begin(), m.theta().end(), r.model.theta().begin()));
  CHECK(save_checkpoint(m, ck.config, &r.metrics) == text);
  const Batch probe = gen_samples(cfg.task, 99, 5);
  for (const auto& x : probe.inputs) {
    const Vector y0 = r.model.forward(x), y1 = m.forward(x);
    CHECK(std::equal(y0.begin(), y0.end(), y1.begin()));
  }
}

TEST_CASE("a checkpoint with mismatched views is rejected") {
  const RunConfig cfg = tiny_config();
  Checkpoint ck = parse_checkpoint(save_checkpoint(make_model(cfg), cfg));
  ck.views[0].length += 1;
  CHECK_THROWS(load_model(ck));
}
