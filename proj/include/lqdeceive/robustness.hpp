#pragma once

#include <string>

#include "lqdeceive/deception.hpp"

namespace lqdeceive {

/// The adversary's true weights when they differ from the assumed (Q, R).
struct MismatchSpec {
  Matrix Q_hat;
  Matrix R_hat;

  void validate(const DeceptionProblem& problem) const;
};

struct MismatchedCost {
  double J_hat = 0.0;
  Matrix K_hat_u;
  Matrix P_hat_u;
};

MismatchedCost mismatched_cost(const DeceptionProblem& problem,
                               const MismatchSpec& mismatch, const Matrix& gain);

/// Entrywise num ./ den. Entries whose denominator is below 1e-12 in
/// magnitude are marked not applicable and hold NaN.
struct SuppressionTable {
  Matrix ratio;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> applicable;
};

SuppressionTable suppression_ratios(const Matrix& K_num, const Matrix& K_den);

enum class BoundStatus {
  kStrictBoundHolds,     // Q_hat <= Q, R_hat >= R and J_hat < J_tilde
  kStrictBoundViolated,  // ordering holds but J_hat >= J_tilde
  kWithinEpsilon,        // no ordering; J_hat <= J_tilde + epsilon
  kExceedsEpsilon,       // no ordering; J_hat > J_tilde + epsilon
  kTargetNonzero,        // K_bar != 0: gap reported descriptively only
};

std::string to_string(BoundStatus status);

struct RobustnessReport {
  double J_tilde = 0.0;
  double J_hat = 0.0;
  double gap = 0.0;  // J_hat - J_tilde
  bool ordering_holds = false;
  double epsilon = 0.0;
  BoundStatus status = BoundStatus::kTargetNonzero;
  Matrix K_u;
  Matrix K_hat_u;
};

RobustnessReport robustness_report(const DeceptionProblem& problem,
                                   const MismatchSpec& mismatch,
                                   const Matrix& gain_hat, double epsilon = 1e-3);

}  // namespace lqdeceive
