#include "lqdeceive/robustness.hpp"

#include <cmath>
#include <limits>

namespace lqdeceive {

std::string to_string(BoundStatus status) {
  switch (status) {
    case BoundStatus::kStrictBoundHolds: return "StrictBoundHolds";
    case BoundStatus::kStrictBoundViolated: return "StrictBoundViolated";
    case BoundStatus::kWithinEpsilon: return "WithinEpsilon";
    case BoundStatus::kExceedsEpsilon: return "ExceedsEpsilon";
    case BoundStatus::kTargetNonzero: return "TargetNonzero";
  }
  return "Unknown";
}

void MismatchSpec::validate(const DeceptionProblem& problem) const {
  AdversaryObjective{Q_hat, R_hat}.validate(problem.plant.n(), problem.plant.m_a());
}

MismatchedCost mismatched_cost(const DeceptionProblem& problem,
                               const MismatchSpec& mismatch, const Matrix& gain) {
  mismatch.validate(problem);
  const AdversaryObjective actual{mismatch.Q_hat, mismatch.R_hat};
  MismatchedCost out;
  out.P_hat_u = spoofed_value(problem.plant, actual, gain);
  out.K_hat_u = Eigen::LLT<Matrix>(mismatch.R_hat)
                    .solve(problem.plant.B_a.transpose() * out.P_hat_u);
  out.J_hat = (out.K_hat_u - problem.K_bar).squaredNorm() +
              (gain.transpose() * problem.Gamma * gain).trace();
  return out;
}

SuppressionTable suppression_ratios(const Matrix& K_num, const Matrix& K_den) {
  if (K_num.rows() != K_den.rows() || K_num.cols() != K_den.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "gain matrices must have equal shapes");
  }
  SuppressionTable table;
  table.ratio.resize(K_num.rows(), K_num.cols());
  table.applicable.resize(K_num.rows(), K_num.cols());
  for (Eigen::Index i = 0; i < K_num.rows(); ++i) {
    for (Eigen::Index j = 0; j < K_num.cols(); ++j) {
      const bool ok = std::abs(K_den(i, j)) >= 1e-12;
      table.applicable(i, j) = ok;
      table.ratio(i, j) =
          ok ? K_num(i, j) / K_den(i, j) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return table;
}

RobustnessReport robustness_report(const DeceptionProblem& problem,
                                   const MismatchSpec& mismatch,
                                   const Matrix& gain_hat, double epsilon) {
  problem.validate();
  RobustnessReport report;
  report.epsilon = epsilon;
  const DeceptionPoint nominal = evaluate_deception(problem, gain_hat);
  const MismatchedCost actual = mismatched_cost(problem, mismatch, gain_hat);
  // Same arithmetic for both costs, so identical weights give a zero gap.
  report.J_tilde =
      mismatched_cost(problem, {problem.objective.Q, problem.objective.R}, gain_hat).J_hat;
  report.J_hat = actual.J_hat;
  report.gap = actual.J_hat - report.J_tilde;
  report.K_u = nominal.attack;
  report.K_hat_u = actual.K_hat_u;

  constexpr double kOrderTol = 1e-12;
  // The strict inequality needs an actual mismatch; identical weights give a
  // zero gap and fall through to the epsilon comparison.
  const bool identical = mismatch.Q_hat == problem.objective.Q &&
                         mismatch.R_hat == problem.objective.R;
  report.ordering_holds =
      !identical &&
      max_eigenvalue(mismatch.Q_hat - problem.objective.Q) <= kOrderTol &&
      min_eigenvalue(mismatch.R_hat - problem.objective.R) >= -kOrderTol;

  if (problem.K_bar.norm() != 0.0) {
    report.status = BoundStatus::kTargetNonzero;
  } else if (report.ordering_holds) {
    report.status = report.J_hat < report.J_tilde ? BoundStatus::kStrictBoundHolds
                                                  : BoundStatus::kStrictBoundViolated;
  } else {
    report.status = report.gap <= epsilon ? BoundStatus::kWithinEpsilon
                                          : BoundStatus::kExceedsEpsilon;
  }
  return report;
}

}  // namespace lqdeceive
