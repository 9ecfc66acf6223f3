#include "nanode/config.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string_view>

#include "json.hpp"
#include "nanode/io.hpp"

namespace nanode {

using json = nlohmann::ordered_json;

namespace {

std::string_view to_string(InitMode m) { return m == InitMode::FanIn ? "fan_in" : "normal"; }

InitMode parse_init_mode(std::string_view name) {
  if (name == "fan_in") return InitMode::FanIn;
  if (name == "normal") return InitMode::Normal;
  throw ContractViolation("unknown init mode '" + std::string(name) + "'");
}

// Walks a JSON document, recording every problem instead of stopping at the
// first one.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  /// Returns the member object at `key`, or null when absent or malformed.
  const json* section(const json& parent, const std::string& key,
                      std::initializer_list<std::string_view> allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& j = parent.at(key);
    if (!j.is_object()) {
      errors_.push_back(key + ": expected an object");
      return nullptr;
    }
    check_keys(j, key + ".", allowed);
    return &j;
  }

  void check_keys(const json& j, const std::string& prefix,
                  std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, v] : j.items())
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        errors_.push_back(prefix + k + ": unknown key");
  }

  void integer(const json* obj, const std::string& path, const char* key, long& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_number_integer())
      out = v.get<long>();
    else
      errors_.push_back(path + key + ": expected an integer");
  }

  void seed(const json* obj, const std::string& path, const char* key, std::uint64_t& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_number_unsigned())
      out = v.get<std::uint64_t>();
    else
      errors_.push_back(path + key + ": expected a non-negative integer");
  }

  void number(const json* obj, const std::string& path, const char* key, double& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_number())
      out = v.get<double>();
    else
      errors_.push_back(path + key + ": expected a number");
  }

  void boolean(const json* obj, const std::string& path, const char* key, bool& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_boolean())
      out = v.get<bool>();
    else
      errors_.push_back(path + key + ": expected true or false");
  }

  void text(const json* obj, const std::string& path, const char* key, std::string& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_string())
      out = v.get<std::string>();
    else
      errors_.push_back(path + key + ": expected a string");
  }

  template <class E, class Parse>
  void choice(const json* obj, const std::string& path, const char* key, E& out, Parse parse) {
    std::string s;
    const std::size_t before = errors_.size();
    text(obj, path, key, s);
    if (errors_.size() != before || !obj || !obj->contains(key)) return;
    try {
      out = parse(s);
    } catch (const ContractViolation& e) {
      errors_.push_back(path + key + ": " + e.what());
    }
  }

 private:
  std::vector<std::string>& errors_;
};

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  if (!doc.is_object()) throw ConfigError({"top level: expected an object"});

  RunConfig c;
  Reader r(errors);
  r.check_keys(doc, "",
               {"task", "data", "model", "basis", "ortho", "solver", "grad", "train", "output"});
  r.choice(&doc, "", "task", c.task, parse_task);

  const json* data = r.section(doc, "data", {"train_size", "test_size", "noise"});
  r.integer(data, "data.", "train_size", c.data.train_size);
  r.integer(data, "data.", "test_size", c.data.test_size);
  r.number(data, "data.", "noise", c.data.noise);

  const json* model = r.section(doc, "model", {"variant", "N", "layers", "activation",
                                                "input_stem", "output_stem", "gates", "bias"});
  r.choice(model, "model.", "variant", c.model.variant, parse_variant);
  r.integer(model, "model.", "N", c.model.state_dim);
  r.integer(model, "model.", "layers", c.model.layers);
  r.choice(model, "model.", "activation", c.model.activation, parse_activation);
  r.choice(model, "model.", "input_stem", c.model.input_stem, parse_stem);
  r.choice(model, "model.", "output_stem", c.model.output_stem, parse_stem);
  r.integer(model, "model.", "gates", c.model.gates);
  r.boolean(model, "model.", "bias", c.model.bias);

  const json* basis = r.section(doc, "basis", {"kind", "order", "family", "omega", "init"});
  r.choice(basis, "basis.", "kind", c.basis.kind, parse_basis_kind);
  r.integer(basis, "basis.", "order", c.basis.order);
  r.choice(basis, "basis.", "family", c.basis.family, parse_poly_family);
  r.number(basis, "basis.", "omega", c.basis.omega);
  if (basis) {
    const json* init = r.section(*basis, "init", {"mode", "scale"});
    r.choice(init, "basis.init.", "mode", c.basis.init_mode, parse_init_mode);
    r.number(init, "basis.init.", "scale", c.basis.init_scale);
  }

  const json* ortho = r.section(doc, "ortho", {"enabled"});
  r.boolean(ortho, "ortho.", "enabled", c.ortho.enabled);

  const json* solver = r.section(doc, "solver", {"method", "steps", "horizon"});
  r.choice(solver, "solver.", "method", c.solver.method, parse_method);
  r.integer(solver, "solver.", "steps", c.solver.steps);
  r.number(solver, "solver.", "horizon", c.solver.horizon);

  const json* grad = r.section(doc, "grad", {"method"});
  r.choice(grad, "grad.", "method", c.grad.method, parse_grad_method);

  const json* train = r.section(doc, "train", {"optimizer", "lr", "epochs", "batch", "l2_alpha",
                                                "freq_weighting", "seed"});
  r.choice(train, "train.", "optimizer", c.train.optimizer, parse_optim_kind);
  r.number(train, "train.", "lr", c.train.lr);
  r.integer(train, "train.", "epochs", c.train.epochs);
  r.integer(train, "train.", "batch", c.train.batch);
  r.number(train, "train.", "l2_alpha", c.train.l2_alpha);
  r.boolean(train, "train.", "freq_weighting", c.train.freq_weighting);
  r.seed(train, "train.", "seed", c.train.seed);

  const json* output = r.section(doc, "output", {"directory"});
  r.text(output, "output.", "directory", c.output.directory);

  for (auto& v : validate_config(c)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError({e.what()});
  }
  return parse_config(text);
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["task"] = std::string(to_string(c.task));
  j["data"] = {{"train_size", c.data.train_size},
               {"test_size", c.data.test_size},
               {"noise", c.data.noise}};
  j["model"] = {{"variant", std::string(to_string(c.model.variant))},
                {"N", c.model.state_dim},
                {"layers", c.model.layers},
                {"activation", std::string(to_string(c.model.activation))},
                {"input_stem", std::string(to_string(c.model.input_stem))},
                {"output_stem", std::string(to_string(c.model.output_stem))},
                {"gates", c.model.gates},
                {"bias", c.model.bias}};
  j["basis"] = {{"kind", std::string(to_string(c.basis.kind))},
                {"order", c.basis.order},
                {"family", std::string(to_string(c.basis.family))},
                {"omega", c.basis.omega},
                {"init",
                 {{"mode", std::string(to_string(c.basis.init_mode))},
                  {"scale", c.basis.init_scale}}}};
  j["ortho"] = {{"enabled", c.ortho.enabled}};
  j["solver"] = {{"method", std::string(to_string(c.solver.method))},
                 {"steps", c.solver.steps},
                 {"horizon", c.solver.horizon}};
  j["grad"] = {{"method", std::string(to_string(c.grad.method))}};
  j["train"] = {{"optimizer", std::string(to_string(c.train.optimizer))},
                {"lr", c.train.lr},
                {"epochs", c.train.epochs},
                {"batch", c.train.batch},
                {"l2_alpha", c.train.l2_alpha},
                {"freq_weighting", c.train.freq_weighting},
                {"seed", c.train.seed}};
  j["output"] = {{"directory", c.output.directory}};
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> v;
  const TaskInfo info = task_info(c.task);
  const bool uses_basis =
      c.model.variant == Variant::Nanode || c.model.variant == Variant::GatedMixture;

  if (c.data.train_size < 1) v.push_back("data.train_size: must be at least 1");
  if (c.data.test_size < 1) v.push_back("data.test_size: must be at least 1");
  if (c.data.noise < 0.0) v.push_back("data.noise: must be non-negative");

  if (c.model.state_dim < 1) v.push_back("model.N: must be positive");
  if (c.model.layers < 1) v.push_back("model.layers: must be positive");
  if (c.model.variant == Variant::GatedMixture && c.model.gates < 1)
    v.push_back("model.gates: gated_mixture needs at least one gate");
  if (c.model.input_stem == Stem::Identity && c.model.state_dim != static_cast<long>(info.input_dim))
    v.push_back("model.input_stem: identity stem needs model.N == input dimension " +
                std::to_string(info.input_dim));
  if (c.model.output_stem == Stem::Identity &&
      c.model.state_dim != static_cast<long>(info.output_dim))
    v.push_back("model.output_stem: identity stem needs model.N == output dimension " +
                std::to_string(info.output_dim));

  if (c.basis.order < 0) {
    v.push_back("basis.order: must be non-negative");
  } else if (uses_basis && c.basis.order == 0 &&
             (c.basis.kind == BasisKind::Bucketed || c.basis.kind == BasisKind::Polynomial ||
              c.basis.kind == BasisKind::RandomFeature)) {
    v.push_back("basis.order: " + std::string(to_string(c.basis.kind)) +
                " basis needs order >= 1");
  }
  if (!(c.basis.omega > 0.0)) v.push_back("basis.omega: must be positive");
  if (c.basis.init_scale < 0.0) v.push_back("basis.init.scale: must be non-negative");

  if (c.ortho.enabled && c.model.variant != Variant::Nanode)
    v.push_back("ortho.enabled: orthogonal wrapping needs model.variant nanode");

  if (c.solver.steps < 1) v.push_back("solver.steps: must be positive");
  if (!(c.solver.horizon > 0.0)) v.push_back("solver.horizon: must be positive");
  if (uses_basis && c.basis.kind == BasisKind::Bucketed && c.grad.method == GradMethod::Adjoint &&
      c.solver.steps >= 1 && c.basis.order >= 1 && c.solver.steps % c.basis.order != 0)
    v.push_back("solver.steps, basis.order: bucketed basis with the adjoint method needs steps (" +
                std::to_string(c.solver.steps) + ") to be a multiple of order (" +
                std::to_string(c.basis.order) + ")");

  if (c.grad.method == GradMethod::FiniteDiff)
    v.push_back("grad.method: training needs discrete or adjoint");

  if (!(c.train.lr > 0.0)) v.push_back("train.lr: must be positive");
  if (c.train.epochs < 0) v.push_back("train.epochs: must be non-negative");
  if (c.train.batch < 1) v.push_back("train.batch: must be positive");
  if (c.train.l2_alpha < 0.0) v.push_back("train.l2_alpha: must be non-negative");

  if (c.output.directory.empty()) v.push_back("output.directory: must not be empty");
  return v;
}

BasisShape make_basis(const RunConfig& c, std::mt19937_64& rng) {
  const auto d = static_cast<std::size_t>(c.basis.order);
  const double T = c.solver.horizon;
  switch (c.basis.kind) {
    case BasisKind::Constant: return BasisShape::constant(T);
    case BasisKind::Bucketed: return BasisShape::bucketed(d, T);
    case BasisKind::Polynomial: return BasisShape::polynomial(d, c.basis.family, T);
    case BasisKind::Trigonometric: return BasisShape::trigonometric(d, c.basis.omega, T);
    case BasisKind::RandomFeature:
      return BasisShape::random_feature(d, rng, c.basis.omega, T);
  }
  throw ContractViolation("unhandled basis kind");
}

DynamicsFn make_flow(const RunConfig& c) {
  const auto n = static_cast<std::size_t>(c.model.state_dim);
  const auto layers = static_cast<std::size_t>(c.model.layers);
  const double T = c.solver.horizon;
  const Activation act = c.model.activation;
  const bool bias = c.model.bias;
  std::mt19937_64 rng(c.train.seed ^ 0x9e3779b97f4a7c15ULL);
  switch (c.model.variant) {
    case Variant::Autonomous: return DynamicsFn::autonomous(n, layers, act, T, bias);
    case Variant::AppendTime: return DynamicsFn::append_time(n, layers, act, T, bias);
    case Variant::DirectHypernet: return DynamicsFn::direct_hypernet(n, layers, act, T, bias);
    case Variant::GatedMixture:
      return DynamicsFn::gated_mixture(n, static_cast<std::size_t>(c.model.gates), layers,
                                       make_basis(c, rng), act, bias);
    case Variant::Nanode:
      return c.ortho.enabled ? DynamicsFn::ortho_nanode(n, layers, make_basis(c, rng), act, bias)
                             : DynamicsFn::nanode(n, layers, make_basis(c, rng), act, bias);
  }
  throw ContractViolation("unhandled variant");
}

SolveSpec make_solve(const RunConfig& c) {
  SolveSpec s;
  s.method = c.solver.method;
  s.t0 = 0.0;
  s.t1 = c.solver.horizon;
  s.steps = static_cast<std::size_t>(c.solver.steps);
  return s;
}

LossSpec make_loss(const RunConfig& c) {
  return LossSpec{task_loss(c.task), c.train.l2_alpha, c.train.freq_weighting};
}

NanodeModel make_model(const RunConfig& c) {
  const TaskInfo info = task_info(c.task);
  NanodeModel m(info.input_dim, info.output_dim, make_flow(c), make_solve(c), c.model.input_stem,
                c.model.output_stem);
  std::mt19937_64 rng(c.train.seed);
  m.initialize(InitSpec{c.basis.init_mode, c.basis.init_scale}, rng);
  return m;
}

}  // namespace nanode
