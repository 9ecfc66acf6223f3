#include "nanode/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nanode/io.hpp"

namespace nanode {

using json = nlohmann::ordered_json;

std::string RunMetrics::to_csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,test_loss,train_acc,test_acc,grad_norm,activation_memory_units\n";
  for (const auto& r : rows)
    os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.test_loss)
       << ',' << format_double(r.train_acc) << ',' << format_double(r.test_acc) << ','
       << format_double(r.grad_norm) << ',' << r.activation_memory_units << '\n';
  return os.str();
}

std::string RunMetrics::timing_csv() const {
  std::ostringstream os;
  os << "epoch,wall_ms\n";
  for (std::size_t i = 0; i < rows.size() && i < wall_ms.size(); ++i)
    os << rows[i].epoch << ',' << format_double(wall_ms[i]) << '\n';
  return os.str();
}

EvalResult evaluate(const NanodeModel& model, const Batch& data, LossKind kind,
                    std::size_t threads) {
  NANODE_REQUIRE(data.size() > 0, "evaluation of an empty set");
  const auto outputs = model.forward(data.inputs, threads);
  EvalResult r;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    r.loss += example_loss(kind, outputs[i], data, i);
    if (kind == LossKind::CrossEntropy)
      correct += argmax(outputs[i]) == data.labels[i];
    else
      correct += std::signbit(outputs[i][0]) == std::signbit(data.targets[i][0]);
  }
  const double n = static_cast<double>(data.size());
  r.loss /= n;
  r.accuracy = static_cast<double>(correct) / n;
  return r;
}

TrainResult train_run(const RunConfig& cfg, std::size_t threads, const EpochCallback& on_epoch) {
  if (auto v = validate_config(cfg); !v.empty()) throw ConfigError(std::move(v));
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - started).count();
  };

  TrainResult out{cfg, make_model(cfg), {}, 0};
  NanodeModel& model = out.model;
  const Dataset data =
      gen_dataset(cfg.task, cfg.train.seed, static_cast<std::size_t>(cfg.data.train_size),
                  static_cast<std::size_t>(cfg.data.test_size), cfg.data.noise);
  const LossSpec loss = make_loss(cfg);
  const std::size_t units = cfg.grad.method == GradMethod::Discrete
                                ? static_cast<std::size_t>(cfg.solver.steps) + 1
                                : kAdjointMemoryUnits;

  auto record = [&](long epoch, double grad_norm) {
    const EvalResult tr = evaluate(model, data.train, loss.kind, threads);
    const EvalResult te = evaluate(model, data.test, loss.kind, threads);
    MetricsRow row{epoch, tr.loss, te.loss, tr.accuracy, te.accuracy, grad_norm, units};
    out.metrics.rows.push_back(row);
    out.metrics.wall_ms.push_back(elapsed_ms());
    if (on_epoch) on_epoch(row);
  };

  OptimState opt(cfg.train.optimizer, cfg.train.lr, model.param_count());
  std::mt19937_64 shuffle_rng(cfg.train.seed + 1);
  const std::size_t n = data.train.size();
  const std::size_t batch = std::min(n, static_cast<std::size_t>(cfg.train.batch));
  std::vector<std::size_t> order(n);

  try {
    record(0, 0.0);
    for (long epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(shuffle_rng)]);
      }
      double norm_sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t first = 0; first < n; first += batch) {
        const std::size_t count = std::min(batch, n - first);
        const Batch mb = data.train.select(std::span(order).subspan(first, count));
        const LossGrad lg = model.loss_and_grad(mb, loss, cfg.grad.method, threads);
        optimizer_step(opt, model.theta(), lg.grad);
        norm_sum += norm2(lg.grad);
        ++batches;
        ++out.optimizer_steps;
      }
      record(epoch, norm_sum / static_cast<double>(batches));
    }
  } catch (const DivergenceError& e) {
    out.metrics.diverged = true;
    out.metrics.divergence_message = e.what();
  } catch (const NumericOverflow& e) {
    out.metrics.diverged = true;
    out.metrics.divergence_message = e.what();
  }
  return out;
}

namespace {

json final_metrics(const RunMetrics& m) {
  json j = json::object();
  if (m.rows.empty()) return j;
  const MetricsRow& r = m.rows.back();
  j["epochs_completed"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["test_loss"] = r.test_loss;
  j["train_acc"] = r.train_acc;
  j["test_acc"] = r.test_acc;
  j["activation_memory_units"] = r.activation_memory_units;
  j["diverged"] = m.diverged;
  return j;
}

}  // namespace

std::string summary_json(const TrainResult& r) {
  json j;
  j["task"] = std::string(to_string(r.config.task));
  j["variant"] = std::string(to_string(r.config.model.variant));
  j["basis"] = std::string(to_string(r.config.basis.kind));
  j["order"] = r.config.basis.order;
  j["ortho"] = r.config.ortho.enabled;
  j["grad_method"] = std::string(to_string(r.config.grad.method));
  j["seed"] = r.config.train.seed;
  j["param_count"] = r.model.param_count();
  j["optimizer_steps"] = r.optimizer_steps;
  j["final"] = final_metrics(r.metrics);
  j["diverged"] = r.metrics.diverged;
  j["divergence_message"] = r.metrics.divergence_message;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- checkpoint

std::string save_checkpoint(const NanodeModel& model, const RunConfig& cfg,
                            const RunMetrics* metrics) {
  json j;
  j["format_version"] = kCheckpointVersion;
  j["config"] = json::parse(serialize_config(cfg));
  json views = json::array();
  for (const auto& v : model.layout().views())
    views.push_back({{"name", v.name}, {"offset", v.offset}, {"length", v.length}});
  j["views"] = views;
  j["params"] = std::vector<double>(model.theta().begin(), model.theta().end());
  j["metrics"] = metrics ? final_metrics(*metrics) : json::object();
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation(std::string("malformed checkpoint: ") + e.what());
  }
  Checkpoint ck;
  try {
    ck.format_version = j.at("format_version").get<int>();
    if (ck.format_version != kCheckpointVersion)
      throw ContractViolation("unsupported checkpoint format_version " +
                              std::to_string(ck.format_version));
    ck.config = parse_config(j.at("config").dump());
    for (const auto& v : j.at("views"))
      ck.views.push_back(ParamView{v.at("name").get<std::string>(),
                                   v.at("offset").get<std::size_t>(),
                                   v.at("length").get<std::size_t>()});
    ck.params = j.at("params").get<std::vector<double>>();
    ck.metrics_json = j.contains("metrics") ? j.at("metrics").dump() : "{}";
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

NanodeModel load_model(const Checkpoint& ck) {
  NanodeModel m = make_model(ck.config);
  const auto& views = m.layout().views();
  NANODE_REQUIRE(views.size() == ck.views.size(), "checkpoint view table does not match config");
  for (std::size_t i = 0; i < views.size(); ++i)
    NANODE_REQUIRE(views[i].name == ck.views[i].name && views[i].offset == ck.views[i].offset &&
                       views[i].length == ck.views[i].length,
                   "checkpoint view '" + ck.views[i].name + "' does not match config");
  m.set_theta(ck.params);
  return m;
}

}  // namespace nanode
