#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nanode {

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// out-of-range time, bad index).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A Householder vector whose norm is too small to define a reflection.
class DegenerateVector : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A non-finite value appeared while evaluating the right-hand side.
class NumericOverflow : public std::runtime_error {
 public:
  NumericOverflow(const std::string& what, double t)
      : std::runtime_error(what + " (t=" + std::to_string(t) + ")"), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A solver state became non-finite or exceeded the divergence threshold.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& reason, long step, double t, long example = -1)
      : std::runtime_error(describe(reason, step, t, example)),
        reason_(reason),
        step_(step),
        time_(t),
        example_(example) {}

  /// Same failure, attributed to one example of a batch.
  DivergenceError for_example(long example) const {
    return DivergenceError(reason_, step_, time_, example);
  }

  const std::string& reason() const noexcept { return reason_; }
  long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }
  long example() const noexcept { return example_; }

 private:
  static std::string describe(const std::string& reason, long step, double t, long example) {
    std::string s = example >= 0 ? "example " + std::to_string(example) + ": " : "";
    return s + reason + " at step " + std::to_string(step) + " (t=" + std::to_string(t) + ")";
  }

  std::string reason_;
  long step_;
  double time_;
  long example_;
};

/// Configuration validation failure; carries every violation found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

#define NANODE_REQUIRE(cond, msg)                \
  do {                                           \
    if (!(cond)) throw ::nanode::ContractViolation(msg); \
  } while (0)

}  // namespace nanode
