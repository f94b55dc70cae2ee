#include "lqdeceive/dual.hpp"

#include <sstream>

#include "relaxation.hpp"

namespace lqdeceive {

namespace {

Matrix spd_inverse(const Matrix& M) {
  const Eigen::Index k = M.rows();
  return symmetrize(Eigen::LLT<Matrix>(symmetrize(M)).solve(Matrix::Identity(k, k)));
}

void require_shape(const Matrix& X, Eigen::Index r, Eigen::Index c, const char* name) {
  if (X.rows() != r || X.cols() != c || !X.allFinite()) {
    std::ostringstream os;
    os << name << " must be a finite " << r << "x" << c << " matrix";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
}

}  // namespace

void DualProblem::validate() const {
  plant.validate(/*require_hurwitz=*/false);
  const Eigen::Index n = plant.n();
  require_shape(Q, n, n, "Q");
  require_shape(M, plant.m_u(), plant.m_u(), "M");
  require_shape(N_bar, plant.m_u(), n, "N_bar");
  require_shape(Gamma, plant.m_a(), plant.m_a(), "Gamma");
  for (const auto* w : {&Q, &M, &Gamma}) {
    if (!is_symmetric(*w)) throw Error(ErrorKind::NonSymmetricInput, "weights must be symmetric");
  }
  if (!is_positive_definite(Q) || !is_positive_definite(M)) {
    throw Error(ErrorKind::InvalidInput, "Q and M must be positive definite");
  }
  if (min_eigenvalue(Gamma) < kGammaFloor * (1.0 - 1e-6)) {
    throw Error(ErrorKind::InvalidInput, "Gamma must dominate the floor 1e-12 I");
  }
}

ControllerGain poisoned_controller(const DualProblem& dual, const Matrix& L) {
  const Plant& pl = dual.plant;
  require_shape(L, pl.m_a(), pl.n(), "L");
  const Matrix poisoned = pl.A + pl.B_a * L;
  ControllerGain out;
  out.Z = solve_are_min(poisoned, pl.B_u, dual.Q, dual.M).X;
  out.N = -Eigen::LLT<Matrix>(dual.M).solve(pl.B_u.transpose() * out.Z);
  return out;
}

ControllerGain nominal_controller(const DualProblem& dual) {
  dual.validate();
  return poisoned_controller(dual, Matrix::Zero(dual.plant.m_a(), dual.plant.n()));
}

bool range_condition(const Matrix& B_a, const Matrix& B_u, double tol) {
  if (B_a.rows() != B_u.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "B_a and B_u must have the same row count");
  }
  Matrix stacked(B_u.rows(), B_u.cols() + B_a.cols());
  stacked << B_u, B_a;
  return numerical_rank(stacked, tol) == numerical_rank(B_u, tol);
}

DualPoint evaluate_dual(const DualProblem& dual, const Matrix& L) {
  const Plant& pl = dual.plant;
  DualPoint pt;
  pt.gain = L;
  ControllerGain learned;
  try {
    learned = poisoned_controller(dual, L);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) throw;
    throw Error(ErrorKind::OutOfDomain, e.what());
  }
  pt.value = learned.Z;
  pt.learned = learned.N;

  const Matrix Minv = spd_inverse(dual.M);
  const Matrix Minv2 = Minv * Minv;
  const Matrix G = pl.B_u * Minv * pl.B_u.transpose();
  const Matrix poisoned = pl.A + pl.B_a * L;
  pt.closed_loop = poisoned - G * pt.value;
  pt.value_residual = riccati_residual(poisoned, G, dual.Q, pt.value);

  // Differentiating ||N_a - N_bar||^2 through the minimizing ARE gives the
  // adjoint equation closed_loop Pi + Pi closed_loop^T + C = 0 with
  // C = Z B_u M^-2 B_u^T + B_u M^-2 B_u^T Z + N_bar^T M^-1 B_u^T + B_u M^-1 N_bar.
  const Matrix quad = pt.value * pl.B_u * Minv2 * pl.B_u.transpose();
  const Matrix cross = dual.N_bar.transpose() * Minv * pl.B_u.transpose();
  const Matrix forcing = symmetrize(quad + quad.transpose() + cross + cross.transpose());
  try {
    pt.adjoint = solve_lyapunov(pt.closed_loop, forcing, LyapunovForm::kTransposed);
  } catch (const Error& e) {
    throw Error(ErrorKind::OutOfDomain, e.what());
  }
  pt.adjoint_residual = lyapunov_residual(pt.closed_loop, pt.adjoint, forcing,
                                          LyapunovForm::kTransposed);

  const Matrix coupling = pl.B_a.transpose() * pt.value * pt.adjoint;
  pt.gradient = 2.0 * (dual.Gamma * L + coupling);
  pt.gs_gain = -Eigen::LLT<Matrix>(dual.Gamma).solve(coupling);
  pt.cost = (pt.learned - dual.N_bar).squaredNorm() +
            (L.transpose() * dual.Gamma * L).trace();
  return pt;
}

double dual_cost(const DualProblem& dual, const Matrix& L) {
  ControllerGain learned;
  try {
    learned = poisoned_controller(dual, L);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) throw;
    throw Error(ErrorKind::OutOfDomain, e.what());
  }
  return (learned.N - dual.N_bar).squaredNorm() + (L.transpose() * dual.Gamma * L).trace();
}

Matrix dual_gradient(const DualProblem& dual, const Matrix& L) {
  return evaluate_dual(dual, L).gradient;
}

DeceptionResult dual_bsor_solve(const DualProblem& dual, const BsorConfig& config) {
  dual.validate();
  config.validate();
  Matrix start = Matrix::Zero(dual.plant.m_a(), dual.plant.n());
  if (config.initial_gain) {
    start = *config.initial_gain;
    require_shape(start, dual.plant.m_a(), dual.plant.n(), "initial gain");
  } else if (config.init.kind == InitKind::kDeepStabilize) {
    throw Error(ErrorKind::InvalidInput,
                "DeepStabilize initialization does not apply to the dual design");
  }

  const detail::Evaluator evaluate = [&](const Matrix& L) {
    DualPoint pt = evaluate_dual(dual, L);
    detail::RelaxationPoint rp;
    rp.closed_loop_abscissa = spectral_abscissa(pt.closed_loop);
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
  DeceptionResult result =
      detail::run_relaxation(evaluate, start, dual.Gamma, config, std::nullopt);
  if (!range_condition(dual.plant.B_a, dual.plant.B_u)) {
    result.message += result.message.empty() ? "" : "; ";
    result.message += "warning: Ran(B_a) is not contained in Ran(B_u)";
  }
  return result;
}

}  // namespace lqdeceive
