#pragma once

// Forward sensitivity S(t) = ∂x(t)/∂θ, state transition matrices of linear
// time-varying systems, and the norm time series used as stability
// diagnostics.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nanode/dynamics.hpp"
#include "nanode/odeint.hpp"

namespace nanode {

/// Co-integration of ẋ = f and Ṡ = A S + B with S(t0) = 0.
struct SensitivitySolve {
  std::vector<double> times;
  std::vector<Matrix> snapshots;  ///< S at every grid time
  Matrix terminal_s;
  Vector terminal_x;
};

SensitivitySolve integrate_sensitivity(const DynamicsFn& dyn, const Vector& x0,
                                       std::span<const double> theta,
                                       const SolveSpec& spec);

using MatrixFn = std::function<Matrix(double)>;

/// Φ(t1, t0) from Ṁ = A(t) M, M(t0) = I, by RK4.
struct STMSolve {
  Matrix phi;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<std::pair<double, double>> norm_series;  ///< (t, ‖Φ(t, t0)‖₂)
};

STMSolve integrate_stm(const MatrixFn& a_of_t, double t0, double t1, std::size_t steps);

struct SensitivityRow {
  double t = 0.0;
  double norm_s = 0.0;
  double norm_a = 0.0;
  double norm_phi = 0.0;
  double skew_defect = 0.0;  ///< ‖A + Aᵀ‖_F / ‖A‖_F
  double norm_b = 0.0;       ///< ‖∂f/∂θ‖₂
  double norm_w = 0.0;       ///< largest ‖W(t)‖₂ over all layers
};

struct SensitivityReport {
  std::vector<SensitivityRow> rows;
  bool diverged = false;
  std::string divergence_message;

  double max_norm_w() const;
  /// Header t,norm_S,norm_A,norm_Phi,skew_defect,norm_B,norm_W then one row per
  /// grid time, numbers in shortest round-trip form.
  std::string to_csv() const;
};

/// Co-integrates x, S and Φ(t, t0) along the trajectory and samples the norm
/// series at every grid time. Divergence truncates the series and sets the flag.
SensitivityReport gradient_flow_report(const DynamicsFn& dyn, const Vector& x0,
                                       std::span<const double> theta,
                                       const SolveSpec& spec);

}  // namespace nanode
