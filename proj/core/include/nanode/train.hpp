#pragma once

// Seeded training loop and checkpoint persistence.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nanode/config.hpp"
#include "nanode/datasets.hpp"
#include "nanode/model.hpp"

namespace nanode {

/// One evaluation after `epoch` epochs (row 0 is the untrained model).
/// Accuracy for regression tasks is the fraction of outputs whose sign
/// matches the target's.
struct MetricsRow {
  long epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double grad_norm = 0.0;  ///< mean ‖∇θ‖₂ over the epoch's minibatches
  std::size_t activation_memory_units = 0;
};

struct RunMetrics {
  std::vector<MetricsRow> rows;
  std::vector<double> wall_ms;  ///< per row, not part of the deterministic output
  bool diverged = false;
  std::string divergence_message;

  /// epoch,train_loss,test_loss,train_acc,test_acc,grad_norm,activation_memory_units
  std::string to_csv() const;
  /// epoch,wall_ms
  std::string timing_csv() const;
};

struct EvalResult {
  double loss = 0.0;  ///< mean data loss, no penalty
  double accuracy = 0.0;
};

EvalResult evaluate(const NanodeModel& model, const Batch& data, LossKind kind,
                    std::size_t threads = 1);

struct TrainResult {
  RunConfig config;
  NanodeModel model;
  RunMetrics metrics;
  std::size_t optimizer_steps = 0;
};

using EpochCallback = std::function<void(const MetricsRow&)>;

/// Validates, generates data, trains and evaluates after every epoch.
/// Divergence stops the run and flags the metrics; earlier rows are kept.
TrainResult train_run(const RunConfig& cfg, std::size_t threads = 1,
                      const EpochCallback& on_epoch = {});

/// Deterministic run summary (no timings).
std::string summary_json(const TrainResult& r);

// ---------------------------------------------------------------- checkpoint

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointVersion;
  RunConfig config;
  std::vector<ParamView> views;
  std::vector<double> params;
  std::string metrics_json;  ///< final-row summary, "{}" when absent
};

std::string save_checkpoint(const NanodeModel& model, const RunConfig& cfg,
                            const RunMetrics* metrics = nullptr);
Checkpoint parse_checkpoint(const std::string& text);
/// Rebuilds the configured model and installs the stored parameters.
NanodeModel load_model(const Checkpoint& ck);

}  // namespace nanode
