#include "nanode/datasets.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nanode/io.hpp"

namespace nanode {

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Reflection1D: return "reflection1d";
    case Task::Annuli2D: return "annuli2d";
    case Task::Spirals2D: return "spirals2d";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (auto t : {Task::Reflection1D, Task::Annuli2D, Task::Spirals2D})
    if (to_string(t) == name) return t;
  throw ContractViolation("unknown task '" + std::string(name) + "'");
}

TaskInfo task_info(Task t) {
  if (t == Task::Reflection1D) return {1, 1, false};
  return {2, 2, true};
}

Batch gen_samples(Task task, std::uint64_t seed, std::size_t n, double noise) {
  NANODE_REQUIRE(n >= 2, "a dataset needs at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, noise);
  constexpr double pi = std::numbers::pi;
  Batch b;
  b.inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (task) {
      case Task::Reflection1D: {
        double x = 0.0;
        do x = 2.0 * unit(rng) - 1.0;
        while (std::abs(x) < 0.05);
        b.inputs.push_back(Vector{x});
        b.targets.push_back(Vector{-x});
        break;
      }
      case Task::Annuli2D: {
        const std::size_t label = i % 2;
        const double u = unit(rng);
        const double r = label == 0 ? std::sqrt(u) : std::sqrt(2.25 + u * (6.25 - 2.25));
        const double a = 2.0 * pi * unit(rng);
        b.inputs.push_back(Vector{r * std::cos(a), r * std::sin(a)});
        b.labels.push_back(label);
        break;
      }
      case Task::Spirals2D: {
        const std::size_t label = i % 2;
        const double s = unit(rng);
        const double r = 0.1 + 0.9 * s;
        const double a = 6.0 * pi * s + static_cast<double>(label) * pi;
        const double ex = noise > 0.0 ? jitter(rng) : 0.0;
        const double ey = noise > 0.0 ? jitter(rng) : 0.0;
        b.inputs.push_back(Vector{r * std::cos(a) + ex, r * std::sin(a) + ey});
        b.labels.push_back(label);
        break;
      }
    }
  }
  return b;
}

Dataset gen_dataset(Task task, std::uint64_t seed, std::size_t train_size,
                    std::size_t test_size, double noise) {
  NANODE_REQUIRE(train_size >= 1 && test_size >= 1, "train and test splits must be non-empty");
  const Batch all = gen_samples(task, seed, train_size + test_size, noise);
  Dataset d;
  d.task = task;
  d.seed = seed;
  d.train = all.subset(0, train_size);
  d.test = all.subset(train_size, test_size);
  return d;
}

std::string dataset_csv(Task task, const Batch& batch) {
  const TaskInfo info = task_info(task);
  std::ostringstream os;
  for (std::size_t j = 0; j < info.input_dim; ++j) os << 'x' << j << ',';
  os << (info.classification ? "label" : "target") << '\n';
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (double v : batch.inputs[i]) os << format_double(v) << ',';
    if (info.classification)
      os << batch.labels[i];
    else
      os << format_double(batch.targets[i][0]);
    os << '\n';
  }
  return os.str();
}

}  // namespace nanode
