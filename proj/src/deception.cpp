#include "lqdeceive/deception.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "relaxation.hpp"

namespace lqdeceive {

namespace {

void require_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << M.rows()
       << "x" << M.cols();
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  if (!M.allFinite()) {
    throw Error(ErrorKind::InvalidInput, std::string(name) + " has non-finite entries");
  }
}

void require_spd(const Matrix& M, const char* name) {
  if (!is_symmetric(M)) {
    throw Error(ErrorKind::NonSymmetricInput, std::string(name) + " must be symmetric");
  }
  if (!is_positive_definite(M)) {
    throw Error(ErrorKind::InvalidInput, std::string(name) + " must be positive definite");
  }
}

Matrix spd_inverse(const Matrix& M) {
  const Eigen::Index k = M.rows();
  return symmetrize(Eigen::LLT<Matrix>(symmetrize(M)).solve(Matrix::Identity(k, k)));
}

}  // namespace

std::string to_string(BsorStatus status) {
  switch (status) {
    case BsorStatus::kConverged: return "Converged";
    case BsorStatus::kMaxIterations: return "MaxIterations";
    case BsorStatus::kInfeasibleStart: return "InfeasibleStart";
    case BsorStatus::kDomainExit: return "DomainExit";
  }
  return "Unknown";
}

void Plant::validate(bool require_hurwitz) const {
  const Eigen::Index n = A.rows();
  if (n == 0) throw Error(ErrorKind::InvalidInput, "A must be non-empty");
  require_shape(A, n, n, "A");
  if (B_u.cols() == 0 || B_a.cols() == 0) {
    throw Error(ErrorKind::InvalidInput, "input matrices must have at least one column");
  }
  require_shape(B_u, n, B_u.cols(), "B_u");
  require_shape(B_a, n, B_a.cols(), "B_a");
  if (require_hurwitz && !is_hurwitz(A)) {
    throw Error(ErrorKind::NotHurwitzInput, "closed-loop A must be Hurwitz");
  }
}

void AdversaryObjective::validate(Eigen::Index n, Eigen::Index m_a) const {
  require_shape(Q, n, n, "Q");
  require_shape(R, m_a, m_a, "R");
  require_spd(Q, "Q");
  require_spd(R, "R");
}

void DeceptionProblem::validate() const {
  plant.validate();
  objective.validate(plant.n(), plant.m_a());
  require_shape(K_bar, plant.m_a(), plant.n(), "K_bar");
  require_shape(Gamma, plant.m_u(), plant.m_u(), "Gamma");
  if (!is_symmetric(Gamma)) {
    throw Error(ErrorKind::NonSymmetricInput, "Gamma must be symmetric");
  }
  if (min_eigenvalue(Gamma) < kGammaFloor * (1.0 - 1e-6)) {
    throw Error(ErrorKind::InvalidInput, "Gamma must dominate the floor 1e-12 I");
  }
}

void BsorConfig::validate() const {
  if (!(omega > 0.0 && omega < 2.0)) {
    throw Error(ErrorKind::InvalidInput, "omega must lie in (0, 2)");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "tol must be positive");
  if (max_iter < 0) throw Error(ErrorKind::InvalidInput, "max_iter must be >= 0");
  if (init.kind == InitKind::kDeepStabilize && !(init.sigma > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "DeepStabilize sigma must be positive");
  }
  if (lipschitz_hint && !(*lipschitz_hint > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "lipschitz_hint must be positive");
  }
}

NominalAttack nominal_attack(const Plant& plant,
                             const AdversaryObjective& objective) {
  plant.validate();
  objective.validate(plant.n(), plant.m_a());
  RiccatiSolution sol =
      solve_are_max(plant.A, plant.B_a, objective.Q, objective.R);
  NominalAttack out;
  out.P = sol.X;
  out.K_star = Eigen::LLT<Matrix>(objective.R).solve(plant.B_a.transpose() * sol.X);
  out.cert = sol.cert;
  return out;
}

Matrix spoofed_value(const Plant& plant, const AdversaryObjective& objective,
                     const Matrix& gain) {
  require_shape(gain, plant.m_u(), plant.n(), "Lambda");
  const Matrix spoofed = plant.A + plant.B_u * gain;
  if (!is_hurwitz(spoofed)) {
    throw Error(ErrorKind::SpoofedPlantUnstable, "A + B_u Lambda is not Hurwitz");
  }
  return solve_are_max(spoofed, plant.B_a, objective.Q, objective.R).X;
}

Matrix spoofed_value(const DeceptionProblem& problem, const Matrix& gain) {
  return spoofed_value(problem.plant, problem.objective, gain);
}

Matrix spoofed_attack(const DeceptionProblem& problem, const Matrix& gain) {
  const Matrix P = spoofed_value(problem, gain);
  return Eigen::LLT<Matrix>(problem.objective.R)
      .solve(problem.plant.B_a.transpose() * P);
}

Matrix adjoint_pi(const DeceptionProblem& problem, const Matrix& gain,
                  const Matrix& value) {
  const Plant& pl = problem.plant;
  const Matrix Rinv = spd_inverse(problem.objective.R);
  const Matrix Rinv2 = Rinv * Rinv;
  const Matrix closed =
      pl.A + pl.B_u * gain + pl.B_a * Rinv * pl.B_a.transpose() * value;
  const Matrix cross = problem.K_bar.transpose() * Rinv * pl.B_a.transpose();
  const Matrix quad = value * pl.B_a * Rinv2 * pl.B_a.transpose();
  const Matrix forcing = symmetrize(-cross - cross.transpose() + quad + quad.transpose());
  return solve_lyapunov(closed, forcing, LyapunovForm::kTransposed);
}

DeceptionPoint evaluate_deception(const DeceptionProblem& problem,
                                  const Matrix& gain) {
  const Plant& pl = problem.plant;
  DeceptionPoint pt;
  pt.gain = gain;
  try {
    pt.value = spoofed_value(problem, gain);
  } catch (const Error& e) {
    throw Error(ErrorKind::OutOfDomain, e.what());
  }
  const Matrix Rinv = spd_inverse(problem.objective.R);
  pt.attack = Rinv * pl.B_a.transpose() * pt.value;
  const Matrix spoofed = pl.A + pl.B_u * gain;
  pt.closed_loop = spoofed + pl.B_a * pt.attack;
  pt.value_residual = riccati_residual(
      spoofed, -pl.B_a * Rinv * pl.B_a.transpose(), problem.objective.Q, pt.value);
  try {
    pt.adjoint = adjoint_pi(problem, gain, pt.value);
  } catch (const Error& e) {
    throw Error(ErrorKind::OutOfDomain, e.what());
  }
  {
    const Matrix Rinv2 = Rinv * Rinv;
    const Matrix cross = problem.K_bar.transpose() * Rinv * pl.B_a.transpose();
    const Matrix quad = pt.value * pl.B_a * Rinv2 * pl.B_a.transpose();
    const Matrix forcing = -cross - cross.transpose() + quad + quad.transpose();
    pt.adjoint_residual = lyapunov_residual(pt.closed_loop, pt.adjoint, forcing,
                                            LyapunovForm::kTransposed);
  }
  const Matrix coupling = pl.B_u.transpose() * pt.value * pt.adjoint;
  pt.gradient = 2.0 * (problem.Gamma * gain + coupling);
  pt.gs_gain = -Eigen::LLT<Matrix>(problem.Gamma).solve(coupling);
  pt.cost = (pt.attack - problem.K_bar).squaredNorm() +
            (gain.transpose() * problem.Gamma * gain).trace();
  return pt;
}

double deception_cost(const DeceptionProblem& problem, const Matrix& gain) {
  Matrix attack;
  try {
    attack = spoofed_attack(problem, gain);
  } catch (const Error& e) {
    throw Error(ErrorKind::OutOfDomain, e.what());
  }
  return (attack - problem.K_bar).squaredNorm() +
         (gain.transpose() * problem.Gamma * gain).trace();
}

Matrix deception_gradient(const DeceptionProblem& problem, const Matrix& gain) {
  return evaluate_deception(problem, gain).gradient;
}

ExistenceCertificate check_existence_condition(const DeceptionProblem& problem) {
  problem.validate();
  NominalAttack nominal;
  try {
    nominal = nominal_attack(problem.plant, problem.objective);
  } catch (const Error& e) {
    throw Error(ErrorKind::NominalAttackMissing, e.what());
  }
  const Plant& pl = problem.plant;
  const Eigen::Index n = pl.n();
  ExistenceCertificate cert;
  cert.S = solve_lyapunov(pl.A + pl.B_a * nominal.K_star,
                          2.0 * Matrix::Identity(n, n));
  const double root_gamma = std::sqrt(min_eigenvalue(problem.Gamma));
  cert.lhs = (nominal.K_star - problem.K_bar).norm();
  cert.rhs = root_gamma /
             (root_gamma * (cert.S * pl.B_a).norm() + (cert.S * pl.B_u).norm());
  cert.holds = cert.lhs < cert.rhs;
  // lhs <= (eps / 2) rhs  <=>  eps >= 2 lhs / rhs.
  const double eps = 2.0 * cert.lhs / cert.rhs;
  if (eps < 1.0) cert.strengthened_eps = eps;
  return cert;
}

Matrix init_gain(const Plant& plant, const InitMode& mode) {
  plant.validate(/*require_hurwitz=*/false);
  if (mode.kind == InitKind::kZero) {
    return Matrix::Zero(plant.m_u(), plant.n());
  }
  if (!(mode.sigma > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "DeepStabilize sigma must be positive");
  }
  if (!is_controllable(plant.A, plant.B_u)) {
    throw Error(ErrorKind::NotControllable, "(A, B_u) is not controllable");
  }
  // LQR on the shifted pair (A + sigma I, B_u) with unit weights: the
  // negated gain places every closed-loop eigenvalue left of -sigma.
  const Eigen::Index n = plant.n();
  const Matrix shifted = plant.A + mode.sigma * Matrix::Identity(n, n);
  const RiccatiSolution sol =
      solve_are_min(shifted, plant.B_u, Matrix::Identity(n, n),
                    Matrix::Identity(plant.m_u(), plant.m_u()));
  return -plant.B_u.transpose() * sol.X;
}

Matrix init_gain(const DeceptionProblem& problem, const InitMode& mode) {
  Matrix gain = init_gain(problem.plant, mode);
  try {
    spoofed_value(problem, gain);
  } catch (const Error& e) {
    if (mode.kind == InitKind::kDeepStabilize) {
      throw Error(ErrorKind::ShiftTooSmall, e.what());
    }
    throw;
  }
  return gain;
}

DeceptionResult bsor_solve(const DeceptionProblem& problem,
                           const BsorConfig& config) {
  problem.validate();
  config.validate();

  std::optional<double> zero_cost;
  std::optional<ExistenceCertificate> certificate;
  try {
    NominalAttack nominal = nominal_attack(problem.plant, problem.objective);
    zero_cost = (nominal.K_star - problem.K_bar).squaredNorm();
    certificate = check_existence_condition(problem);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoStabilizingSolution &&
        e.kind() != ErrorKind::NominalAttackMissing) {
      throw;
    }
  }

  Matrix start;
  if (config.initial_gain) {
    start = *config.initial_gain;
    if (start.rows() != problem.plant.m_u() || start.cols() != problem.plant.n()) {
      throw Error(ErrorKind::InvalidInput, "initial gain has the wrong shape");
    }
  } else {
    try {
      start = init_gain(problem.plant, config.init);
    } catch (const Error& e) {
      DeceptionResult result;
      result.status = BsorStatus::kInfeasibleStart;
      result.final_omega = config.omega;
      result.message = e.what();
      return result;
    }
  }

  std::optional<double> eps;
  if (certificate && certificate->strengthened_eps) eps = certificate->strengthened_eps;

  const detail::Evaluator evaluate = [&](const Matrix& gain) {
    DeceptionPoint pt = evaluate_deception(problem, gain);
    detail::RelaxationPoint rp;
    rp.closed_loop_abscissa = spectral_abscissa(pt.closed_loop);
    if (eps) {
      const Matrix& S = certificate->S;
      const Matrix form = pt.closed_loop.transpose() * S + S * pt.closed_loop;
      rp.lyapunov_bound_ok =
          max_eigenvalue(form) <= -2.0 * (1.0 - *eps) + 1e-9;
    }
    rp.gain = std::move(pt.gain);
    rp.value = std::move(pt.value);
    rp.adjoint = std::move(pt.adjoint);
    rp.gs_gain = std::move(pt.gs_gain);
    rp.cost = pt.cost;
    rp.grad_norm = pt.gradient.norm();
    rp.value_residual = pt.value_residual;
    rp.adjoint_residual = pt.adjoint_residual;
    return rp;
  };

  return detail::run_relaxation(evaluate, start, problem.Gamma, config, zero_cost);
}

double closed_loop_energy(const Matrix& A_cl, const Vector& x0) {
  if (A_cl.rows() != A_cl.cols() || x0.size() != A_cl.rows()) {
    throw Error(ErrorKind::InvalidInput, "A_cl must be square and match x0");
  }
  if (!is_hurwitz(A_cl)) return std::numeric_limits<double>::infinity();
  const Eigen::Index n = A_cl.rows();
  const Matrix W = solve_lyapunov(A_cl, Matrix::Identity(n, n));
  return x0.dot(W * x0);
}

}  // namespace lqdeceive
