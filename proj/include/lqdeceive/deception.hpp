#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lqdeceive/matsolve.hpp"

namespace lqdeceive {

/// Smallest regularizer eigenvalue accepted; "gamma: 0" maps here.
inline constexpr double kGammaFloor = 1e-12;

/// Closed-loop plant x' = A x + B_u u + B_a a, with the nominal feedback
/// already folded into A.
struct Plant {
  Matrix A;
  Matrix B_u;
  Matrix B_a;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m_u() const { return B_u.cols(); }
  Eigen::Index m_a() const { return B_a.cols(); }

  /// Dimension and finiteness checks; optionally also alpha(A) < 0.
  void validate(bool require_hurwitz = true) const;
};

/// The adversary's weights: it maximizes the integral of x'Qx - a'Ra.
struct AdversaryObjective {
  Matrix Q;
  Matrix R;

  void validate(Eigen::Index n, Eigen::Index m_a) const;
};

struct DeceptionProblem {
  Plant plant;
  AdversaryObjective objective;
  Matrix K_bar;  // m_a x n target attack gain
  Matrix Gamma;  // m_u x m_u regularizer

  void validate() const;
};

enum class InitKind { kZero, kDeepStabilize };

struct InitMode {
  InitKind kind = InitKind::kZero;
  double sigma = 100.0;

  static InitMode zero() { return {InitKind::kZero, 0.0}; }
  static InitMode deep(double sigma = 100.0) {
    return {InitKind::kDeepStabilize, sigma};
  }
};

struct BsorConfig {
  double omega = 1e-3;
  double tol = 1e-6;
  int max_iter = 100000;
  InitMode init;
  /// Overrides `init` when present.
  std::optional<Matrix> initial_gain;
  /// Lipschitz constant of the gradient, if the caller knows one.
  std::optional<double> lipschitz_hint;
  /// Value/adjoint matrices are kept for the first, last and every k-th
  /// iterate.
  int snapshot_every = 50;
  int max_halvings = 20;
  double grad_floor = 1e-10;

  void validate() const;
};

struct DeceptionIterate {
  int index = 0;
  Matrix gain;
  double cost = 0.0;
  double grad_norm = 0.0;
  /// ||gain_i - gain_{i-1}||_F (0 for the first iterate).
  double step_norm = 0.0;
  /// Relaxation factor that produced this iterate.
  double omega = 0.0;
  /// Spectral abscissa of the deceived closed loop at this iterate.
  double closed_loop_abscissa = 0.0;
  double value_residual = 0.0;
  double adjoint_residual = 0.0;
  /// Set when a strengthened existence certificate supplies S and epsilon.
  std::optional<bool> lyapunov_bound_ok;
  std::optional<Matrix> value;
  std::optional<Matrix> adjoint;
};

enum class BsorStatus { kConverged, kMaxIterations, kInfeasibleStart, kDomainExit };

std::string to_string(BsorStatus status);

struct StationarityResiduals {
  double value_equation = 0.0;    // Riccati equation for the value matrix
  double adjoint_equation = 0.0;  // Lyapunov equation for the adjoint
  double gain_equation = 0.0;     // ||gain - gs_gain||_F
};

struct DeceptionResult {
  Matrix gain_hat;
  Matrix value_hat;
  Matrix adjoint_hat;
  std::vector<DeceptionIterate> trace;
  BsorStatus status = BsorStatus::kMaxIterations;
  StationarityResiduals stationarity;
  double final_omega = 0.0;
  /// A step was rejected because the cost increased, so omega was halved.
  bool step_size_bound_exceeded = false;
  /// omega is above the bound implied by lipschitz_hint.
  bool omega_exceeds_lipschitz_bound = false;
  /// The gain at which the Riccati solve failed, for kDomainExit.
  std::optional<Matrix> offending_gain;
  std::string message;
};

/// Everything computed at one gain: value, attack, adjoint, cost, gradient.
struct DeceptionPoint {
  Matrix gain;
  Matrix value;        // P_u
  Matrix attack;       // K_u = R^-1 B_a^T P_u
  Matrix closed_loop;  // A + B_u gain + B_a K_u
  Matrix adjoint;      // Pi
  Matrix gradient;
  Matrix gs_gain;  // -Gamma^-1 B_u^T P_u Pi
  double cost = 0.0;
  double value_residual = 0.0;
  double adjoint_residual = 0.0;
};

struct NominalAttack {
  Matrix K_star;
  Matrix P;
  SolveCertificate cert;
};

struct ExistenceCertificate {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  Matrix S;
  /// Smallest epsilon in (0, 1) for which the strengthened condition holds;
  /// the condition then holds for every larger epsilon below 1.
  std::optional<double> strengthened_eps;
};

NominalAttack nominal_attack(const Plant& plant,
                             const AdversaryObjective& objective);

/// Minimal stabilizing solution of the spoofed Riccati equation at `gain`.
Matrix spoofed_value(const Plant& plant, const AdversaryObjective& objective,
                     const Matrix& gain);
Matrix spoofed_value(const DeceptionProblem& problem, const Matrix& gain);

Matrix spoofed_attack(const DeceptionProblem& problem, const Matrix& gain);

double deception_cost(const DeceptionProblem& problem, const Matrix& gain);

Matrix adjoint_pi(const DeceptionProblem& problem, const Matrix& gain,
                  const Matrix& value);

Matrix deception_gradient(const DeceptionProblem& problem, const Matrix& gain);

/// Full evaluation; throws OutOfDomain when the spoofed ARE has no
/// stabilizing solution at `gain`.
DeceptionPoint evaluate_deception(const DeceptionProblem& problem,
                                  const Matrix& gain);

ExistenceCertificate check_existence_condition(const DeceptionProblem& problem);

Matrix init_gain(const Plant& plant, const InitMode& mode);

/// As above, and additionally throws ShiftTooSmall if the spoofed Riccati
/// equation is still unsolvable at the returned gain.
Matrix init_gain(const DeceptionProblem& problem, const InitMode& mode);

DeceptionResult bsor_solve(const DeceptionProblem& problem,
                           const BsorConfig& config);

/// Integral of ||x||^2 for x' = A_cl x, x(0) = x0; +infinity when A_cl is not
/// Hurwitz.
double closed_loop_energy(const Matrix& A_cl, const Vector& x0);

}  // namespace lqdeceive
