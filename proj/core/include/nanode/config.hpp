#pragma once

// Run configuration: JSON schema, validation and construction of the model
// it describes.
//
//   task                       reflection1d | annuli2d | spirals2d
//   data      train_size, test_size, noise
//   model     variant, N, layers, activation, input_stem, output_stem, gates, bias
//   basis     kind, order, family, omega, init {mode, scale}
//   ortho     enabled
//   solver    method, steps, horizon
//   grad      method
//   train     optimizer, lr, epochs, batch, l2_alpha, freq_weighting, seed
//   output    directory
//
// Missing keys take the defaults below; unknown keys are violations.

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "nanode/datasets.hpp"
#include "nanode/dynamics.hpp"
#include "nanode/grad.hpp"
#include "nanode/model.hpp"
#include "nanode/odeint.hpp"
#include "nanode/optim.hpp"
#include "nanode/timebasis.hpp"

namespace nanode {

struct RunConfig {
  Task task = Task::Spirals2D;

  struct Data {
    long train_size = 256;
    long test_size = 256;
    double noise = kSpiralNoise;
  } data;

  struct Model {
    Variant variant = Variant::Nanode;
    long state_dim = 8;
    long layers = 1;
    Activation activation = Activation::Tanh;
    Stem input_stem = Stem::Affine;
    Stem output_stem = Stem::Affine;
    long gates = 2;
    bool bias = true;
  } model;

  struct Basis {
    BasisKind kind = BasisKind::Trigonometric;
    long order = 2;
    PolyFamily family = PolyFamily::Chebyshev;
    double omega = 2.0 * std::numbers::pi;
    InitMode init_mode = InitMode::FanIn;
    double init_scale = 1.0;
  } basis;

  struct Ortho {
    bool enabled = false;
  } ortho;

  struct Solver {
    Method method = Method::RK4;
    long steps = 32;
    double horizon = 1.0;
  } solver;

  struct Grad {
    GradMethod method = GradMethod::Discrete;
  } grad;

  struct Train {
    OptimKind optimizer = OptimKind::Adam;
    double lr = 1e-3;
    long epochs = 10;
    long batch = 64;
    double l2_alpha = 0.0;
    bool freq_weighting = false;
    std::uint64_t seed = 0;
  } train;

  struct Output {
    std::string directory = "runs/default";
  } output;
};

/// Parses JSON text. Throws ConfigError listing every malformed or unknown
/// key and every validation failure.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Pretty-printed JSON with every key present.
std::string serialize_config(const RunConfig& cfg);

/// Every violated rule, each message naming the key(s) involved.
std::vector<std::string> validate_config(const RunConfig& cfg);

/// Basis of the configured order; random features draw from `rng`.
BasisShape make_basis(const RunConfig& cfg, std::mt19937_64& rng);
DynamicsFn make_flow(const RunConfig& cfg);
SolveSpec make_solve(const RunConfig& cfg);
LossSpec make_loss(const RunConfig& cfg);
/// Model with parameters initialized from train.seed.
NanodeModel make_model(const RunConfig& cfg);

}  // namespace nanode
