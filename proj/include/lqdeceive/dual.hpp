#pragma once

#include "lqdeceive/deception.hpp"

namespace lqdeceive {

/// A defender learns the LQR gain for (A, B_u, Q, M) while a poisoner feeds
/// a(t) = L x(t) through B_a to steer the learned gain toward N_bar.
struct DualProblem {
  Plant plant;
  Matrix Q;
  Matrix M;      // m_u x m_u control weight
  Matrix N_bar;  // m_u x n target controller gain
  Matrix Gamma;  // m_a x m_a regularizer

  void validate() const;
};

struct ControllerGain {
  Matrix N;
  Matrix Z;
};

/// N* = -M^-1 B_u^T Z with Z the stabilizing LQR solution.
ControllerGain nominal_controller(const DualProblem& dual);

/// Gain the defender learns on the poisoned plant A + B_a L.
ControllerGain poisoned_controller(const DualProblem& dual, const Matrix& L);

/// Ran(B_a) contained in Ran(B_u), up to a relative rank tolerance.
bool range_condition(const Matrix& B_a, const Matrix& B_u, double tol = 1e-9);

struct DualPoint {
  Matrix gain;     // L
  Matrix value;    // Z_a
  Matrix learned;  // N_a
  Matrix closed_loop;
  Matrix adjoint;
  Matrix gradient;
  Matrix gs_gain;
  double cost = 0.0;
  double value_residual = 0.0;
  double adjoint_residual = 0.0;
};

/// Cost ||N_a(L) - N_bar||^2 + tr(L' Gamma L) with its adjoint-based gradient.
DualPoint evaluate_dual(const DualProblem& dual, const Matrix& L);

double dual_cost(const DualProblem& dual, const Matrix& L);
Matrix dual_gradient(const DualProblem& dual, const Matrix& L);

/// Relaxed block iteration on the dual design. Starts from zero unless
/// config.initial_gain is set; DeepStabilize is rejected as meaningless here.
DeceptionResult dual_bsor_solve(const DualProblem& dual, const BsorConfig& config);

}  // namespace lqdeceive
