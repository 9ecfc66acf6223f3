#pragma once

// Synthetic tasks:
//   reflection1d  x ~ U[−1, 1] without |x| < 0.05, target −x
//   annuli2d      disk r ≤ 1 (label 0) against ring 1.5 ≤ r ≤ 2.5 (label 1)
//   spirals2d     two interleaved three-turn spirals, Gaussian jitter

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "nanode/model.hpp"

namespace nanode {

enum class Task { Reflection1D, Annuli2D, Spirals2D };

std::string_view to_string(Task t);
Task parse_task(std::string_view name);

struct TaskInfo {
  std::size_t input_dim;
  std::size_t output_dim;
  bool classification;
};

TaskInfo task_info(Task t);
inline LossKind task_loss(Task t) {
  return task_info(t).classification ? LossKind::CrossEntropy : LossKind::MSE;
}

inline constexpr double kSpiralNoise = 0.05;

/// n samples from the task's generator seeded with `seed`. Class labels
/// alternate so every even-sized prefix is balanced.
Batch gen_samples(Task task, std::uint64_t seed, std::size_t n, double noise = kSpiralNoise);

struct Dataset {
  Task task = Task::Spirals2D;
  std::uint64_t seed = 0;
  Batch train;
  Batch test;
};

/// train_size + test_size samples from one stream, split in order.
Dataset gen_dataset(Task task, std::uint64_t seed, std::size_t train_size,
                    std::size_t test_size, double noise = kSpiralNoise);

/// Columns x0[,x1],target... or x0[,x1],label.
std::string dataset_csv(Task task, const Batch& batch);

}  // namespace nanode
