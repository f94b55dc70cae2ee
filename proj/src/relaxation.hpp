#pragma once

#include <functional>
#include <optional>

#include "lqdeceive/deception.hpp"

namespace lqdeceive::detail {

/// What the relaxation loop needs to know about one gain.
struct RelaxationPoint {
  Matrix gain;
  Matrix value;
  Matrix adjoint;
  Matrix gs_gain;
  double cost = 0.0;
  double grad_norm = 0.0;
  double closed_loop_abscissa = 0.0;
  double value_residual = 0.0;
  double adjoint_residual = 0.0;
  std::optional<bool> lyapunov_bound_ok;
};

/// Throws lqdeceive::Error when the gain leaves the domain.
using Evaluator = std::function<RelaxationPoint(const Matrix&)>;

/// Relaxed block iteration gain <- gain + omega (gs_gain - gain), shared by
/// the primal and dual designs. When `cost_cap` is set the start must satisfy
/// cost <= cost_cap.
DeceptionResult run_relaxation(const Evaluator& evaluate, const Matrix& start,
                               const Matrix& Gamma, const BsorConfig& config,
                               std::optional<double> cost_cap);

}  // namespace lqdeceive::detail
