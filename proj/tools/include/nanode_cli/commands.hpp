#pragma once

// Subcommands of the `nanode` executable, callable in-process.
//
// Exit codes: 0 success, 1 check failure, 2 invalid config, 3 divergence
// where divergence is fatal (train).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nanode/config.hpp"

namespace nanode::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitDiverged = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;  ///< overrides output.directory when non-empty
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::size_t threads = 1;
  std::ostream* out = nullptr;  ///< progress and reports; std::cout when null
  std::ostream* err = nullptr;  ///< diagnostics; std::cerr when null
};

/// Loads the config and applies --seed / --out. Prints every violation and
/// returns nullopt on failure.
std::optional<RunConfig> resolve_config(const CommonOptions& opt);

/// metrics.csv, checkpoint.json, summary.json (deterministic) plus
/// timing.csv (wall-clock, per epoch).
int cmd_train(const CommonOptions& opt);

struct GradcheckRow {
  std::string check;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t worst_index = 0;
  bool pass = false;
};

struct GradcheckOptions {
  /// Test hook: perturbs one entry of ∂f/∂θ before comparison.
  bool corrupt_jac_theta = false;
};

inline constexpr double kDiscreteFdTolerance = 1e-6;
inline constexpr double kAdjointTolerance = 1e-3;
inline constexpr double kJacobianTolerance = 1e-6;

/// discrete-vs-fd, adjoint-vs-discrete, jac_theta-vs-fd and jac_x-vs-fd on a
/// 4-example probe batch at a perturbed initialization.
std::vector<GradcheckRow> run_gradcheck(const RunConfig& cfg, const GradcheckOptions& g = {});
std::string gradcheck_csv(const std::vector<GradcheckRow>& rows);
/// gradcheck.csv; exit 1 when any check fails.
int cmd_gradcheck(const CommonOptions& opt, const GradcheckOptions& g = {});

/// stability.csv and stability.json for the configured model at
/// initialization, or at the parameters of `checkpoint` when given.
/// Divergence is recorded and still exits 0.
int cmd_stability(const CommonOptions& opt, const std::string& checkpoint = "");

struct OrthobenchOptions {
  std::size_t n = 64;
  std::size_t d = 64;
  std::size_t repeats = 1000;
  std::uint64_t seed = 0;
};

struct OrthobenchRow {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string method;
  double ns_per_apply = 0.0;
  std::uint64_t flop_count = 0;
};

struct OrthobenchResult {
  std::vector<OrthobenchRow> rows;
  double max_output_diff = 0.0;
};

OrthobenchResult run_orthobench(const OrthobenchOptions& o);
/// orthobench.csv (N,d,method,ns_per_apply,flop_count). Exit 1 only when the
/// two methods disagree by more than 1e-10.
int cmd_orthobench(const CommonOptions& opt, const OrthobenchOptions& o);

/// train.csv and test.csv of the configured task and seed.
int cmd_datagen(const CommonOptions& opt);

}  // namespace nanode::cli
