#include "lqdeceive/matsolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Jacobi>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace lqdeceive {

using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NonSymmetricInput: return "NonSymmetricInput";
    case ErrorKind::NotHurwitz: return "NotHurwitz";
    case ErrorKind::NotHurwitzInput: return "NotHurwitzInput";
    case ErrorKind::NoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::NotControllable: return "NotControllable";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::SpoofedPlantUnstable: return "SpoofedPlantUnstable";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NominalAttackMissing: return "NominalAttackMissing";
    case ErrorKind::ShiftTooSmall: return "ShiftTooSmall";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::Blowup: return "Blowup";
    case ErrorKind::PolicyDestabilized: return "PolicyDestabilized";
    case ErrorKind::RankDeficientData: return "RankDeficientData";
  }
  return "Unknown";
}

namespace {

void require_square(const Matrix& A, const char* name) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    std::ostringstream os;
    os << name << " must be square and non-empty, got " << A.rows() << "x"
       << A.cols();
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  if (!A.allFinite()) {
    throw Error(ErrorKind::InvalidInput,
                std::string(name) + " has non-finite entries");
  }
}

void require_same_square(const Matrix& A, const Matrix& X, const char* name) {
  if (X.rows() != A.rows() || X.cols() != A.cols()) {
    throw Error(ErrorKind::InvalidInput,
                std::string(name) + " dimension does not match A");
  }
}

// Swaps the adjacent diagonal entries k and k+1 of the upper triangular T,
// updating the unitary factor U so that U T U^H is unchanged.
void swap_adjacent(ComplexMatrix& T, ComplexMatrix& U, Eigen::Index k) {
  const Complex t11 = T(k, k);
  const Complex t22 = T(k + 1, k + 1);
  Eigen::JacobiRotation<Complex> rot;
  rot.makeGivens(T(k, k + 1), t22 - t11);
  T.applyOnTheLeft(k, k + 1, rot.adjoint());
  T.applyOnTheRight(k, k + 1, rot);
  U.applyOnTheRight(k, k + 1, rot);
  T(k + 1, k) = Complex(0.0, 0.0);
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
}

// Moves every eigenvalue with negative real part to the leading block.
void order_stable_first(ComplexMatrix& T, ComplexMatrix& U) {
  const Eigen::Index N = T.rows();
  bool swapped = true;
  while (swapped) {
    swapped = false;
    for (Eigen::Index k = 0; k + 1 < N; ++k) {
      if (T(k, k).real() >= 0.0 && T(k + 1, k + 1).real() < 0.0) {
        swap_adjacent(T, U, k);
        swapped = true;
      }
    }
  }
}

bool pbh_full_rank(const Matrix& A, const Matrix& B, const Complex& lambda) {
  const Eigen::Index n = A.rows();
  ComplexMatrix M(n, n + B.cols());
  M.leftCols(n) = A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
  M.rightCols(B.cols()) = B.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(M);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s(0));
  return s(n - 1) > 1e-9 * scale;
}

Eigen::VectorXcd eigenvalues_of(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "eigenvalue iteration did not converge");
  }
  return es.eigenvalues();
}

}  // namespace

double spectral_abscissa(const Matrix& A) {
  require_square(A, "A");
  return eigenvalues_of(A).real().maxCoeff();
}

bool is_hurwitz(const Matrix& A, double margin) {
  return spectral_abscissa(A) < -margin;
}

Matrix symmetrize(const Matrix& X) { return 0.5 * (X + X.transpose()); }

bool is_symmetric(const Matrix& X, double tol) {
  if (X.rows() != X.cols()) return false;
  return (X - X.transpose()).norm() <= tol * std::max(1.0, X.norm());
}

bool is_positive_definite(const Matrix& X) {
  if (X.rows() != X.cols() || X.rows() == 0) return false;
  Eigen::LLT<Matrix> llt(symmetrize(X));
  return llt.info() == Eigen::Success;
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lyapunov_residual(const Matrix& A, const Matrix& X, const Matrix& C,
                         LyapunovForm form) {
  if (form == LyapunovForm::kStandard) {
    return (A.transpose() * X + X * A + C).norm();
  }
  return (A * X + X * A.transpose() + C).norm();
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& C, LyapunovForm form,
                      double margin) {
  require_square(A, "A");
  require_same_square(A, C, "C");
  if (!is_symmetric(C)) {
    throw Error(ErrorKind::NonSymmetricInput, "C must be symmetric");
  }
  const double alpha = spectral_abscissa(A);
  if (!(alpha < -margin)) {
    std::ostringstream os;
    os << "spectral abscissa " << alpha << " is not below " << -margin;
    throw Error(ErrorKind::NotHurwitz, os.str());
  }

  // Both forms reduce to M^T X + X M + C = 0.
  const Matrix M = form == LyapunovForm::kStandard ? A : Matrix(A.transpose());
  const Eigen::Index n = M.rows();
  Eigen::ComplexSchur<ComplexMatrix> schur(M.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "Schur decomposition failed");
  }
  const ComplexMatrix& U = schur.matrixU();
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix TH = T.adjoint();

  // With M = U T U^H the equation becomes T^H Y + Y T = -U^H C U, solved one
  // column at a time by forward substitution.
  auto solve_transformed = [&](const Matrix& rhs) {
    const ComplexMatrix F = -(U.adjoint() * rhs.cast<Complex>() * U);
    ComplexMatrix Y = ComplexMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::VectorXcd b = F.col(j);
      for (Eigen::Index k = 0; k < j; ++k) b -= T(k, j) * Y.col(k);
      ComplexMatrix L = TH;
      L.diagonal().array() += T(j, j);
      Y.col(j) = L.triangularView<Eigen::Lower>().solve(b);
    }
    return symmetrize((U * Y * U.adjoint()).real());
  };

  Matrix X = solve_transformed(C);
  // One step of iterative refinement on the residual.
  const Matrix residual = M.transpose() * X + X * M + C;
  X += solve_transformed(symmetrize(residual));
  return symmetrize(X);
}

double riccati_residual(const Matrix& A, const Matrix& G, const Matrix& Q,
                        const Matrix& X) {
  return (A.transpose() * X + X * A + Q - X * G * X).norm();
}

RiccatiSolution solve_riccati(const Matrix& A, const Matrix& G,
                              const Matrix& Q, double margin) {
  require_square(A, "A");
  require_same_square(A, G, "G");
  require_same_square(A, Q, "Q");
  if (!is_symmetric(G) || !is_symmetric(Q)) {
    throw Error(ErrorKind::NonSymmetricInput, "G and Q must be symmetric");
  }
  const Eigen::Index n = A.rows();

  Matrix H(2 * n, 2 * n);
  H << A, -G, -Q, -A.transpose();

  Eigen::ComplexSchur<ComplexMatrix> schur(H.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "Hamiltonian Schur decomposition failed");
  }
  ComplexMatrix T = schur.matrixT();
  ComplexMatrix U = schur.matrixU();

  // Eigenvalues too close to the imaginary axis mean no stabilizing solution.
  const double axis_tol = 1e-10 * std::max(1.0, H.norm());
  Eigen::Index stable = 0;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const double re = T(k, k).real();
    if (std::abs(re) <= axis_tol) {
      throw Error(ErrorKind::NoStabilizingSolution,
                  "Hamiltonian has eigenvalues on the imaginary axis");
    }
    if (re < 0.0) ++stable;
  }
  if (stable != n) {
    throw Error(ErrorKind::NoStabilizingSolution,
                "Hamiltonian stable subspace has the wrong dimension");
  }
  order_stable_first(T, U);

  const ComplexMatrix U1 = U.topLeftCorner(n, n);
  const ComplexMatrix U2 = U.bottomLeftCorner(n, n);
  Eigen::FullPivLU<ComplexMatrix> lu(U1.transpose());
  if (!lu.isInvertible() || lu.rcond() < 1e-13) {
    throw Error(ErrorKind::NoStabilizingSolution,
                "stable invariant subspace is not a graph");
  }
  // X = U2 U1^-1, computed as (U1^-T U2^T)^T.
  const ComplexMatrix Xt = lu.solve(U2.transpose());
  Matrix X = symmetrize(Xt.transpose().real());

  // Newton refinement: (A - G X_k)^T X_{k+1} + X_{k+1} (A - G X_k)
  //                    + Q + X_k G X_k = 0.
  double residual = riccati_residual(A, G, Q, X);
  const double scale =
      std::max({1.0, Q.norm(), A.norm() * X.norm(), G.norm() * X.squaredNorm()});
  for (int step = 0; step < 4 && residual > 1e-14 * scale; ++step) {
    const Matrix closed = A - G * X;
    if (!is_hurwitz(closed, margin)) break;
    Matrix next;
    try {
      next = solve_lyapunov(closed, symmetrize(Q + X * G * X),
                            LyapunovForm::kStandard, margin);
    } catch (const Error&) {
      break;
    }
    const double next_residual = riccati_residual(A, G, Q, next);
    if (!(next_residual < residual)) break;
    X = next;
    residual = next_residual;
  }

  RiccatiSolution out;
  out.X = X;
  out.cert.residual_norm = residual;
  out.cert.hurwitz_margin = -spectral_abscissa(A - G * X);
  if (!(out.cert.hurwitz_margin > margin)) {
    throw Error(ErrorKind::NoStabilizingSolution,
                "Riccati closed loop is not Hurwitz");
  }
  if (!(residual <= 1e-8 * scale)) {
    std::ostringstream os;
    os << "Riccati residual " << residual << " too large for a stationary solution";
    throw Error(ErrorKind::NoStabilizingSolution, os.str());
  }
  out.cert.minimality_certified = true;
  return out;
}

namespace {

Matrix weighted_gram(const Matrix& B, const Matrix& R) {
  if (R.rows() != B.cols() || R.cols() != B.cols()) {
    throw Error(ErrorKind::InvalidInput, "R dimension does not match B");
  }
  if (!is_symmetric(R) || !is_positive_definite(R)) {
    throw Error(ErrorKind::InvalidInput, "R must be symmetric positive definite");
  }
  Eigen::LLT<Matrix> llt(symmetrize(R));
  return symmetrize(B * llt.solve(B.transpose()));
}

void check_weights(const Matrix& A, const Matrix& B, const Matrix& Q) {
  require_square(A, "A");
  require_same_square(A, Q, "Q");
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw Error(ErrorKind::InvalidInput, "B dimension does not match A");
  }
  if (!is_symmetric(Q)) {
    throw Error(ErrorKind::NonSymmetricInput, "Q must be symmetric");
  }
}

}  // namespace

RiccatiSolution solve_are_max(const Matrix& A, const Matrix& B,
                              const Matrix& Q, const Matrix& R, double margin) {
  check_weights(A, B, Q);
  const Matrix G = -weighted_gram(B, R);
  if (!is_hurwitz(A, margin)) {
    throw Error(ErrorKind::NotHurwitzInput,
                "maximizing ARE requires a Hurwitz state matrix");
  }
  RiccatiSolution sol = solve_riccati(A, G, Q, margin);
  if (!is_positive_definite(sol.X)) {
    throw Error(ErrorKind::NoStabilizingSolution,
                "stabilizing solution is not positive definite");
  }
  return sol;
}

RiccatiSolution solve_are_min(const Matrix& A, const Matrix& B,
                              const Matrix& Q, const Matrix& R_ctrl,
                              double margin) {
  check_weights(A, B, Q);
  const Matrix G = weighted_gram(B, R_ctrl);
  if (!is_stabilizable(A, B, margin)) {
    throw Error(ErrorKind::NotStabilizable, "(A, B) is not stabilizable");
  }
  try {
    return solve_riccati(A, G, Q, margin);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoStabilizingSolution) {
      throw Error(ErrorKind::NotStabilizable, e.what());
    }
    throw;
  }
}

bool is_stabilizable(const Matrix& A, const Matrix& B, double margin) {
  require_square(A, "A");
  if (B.rows() != A.rows()) {
    throw Error(ErrorKind::InvalidInput, "B dimension does not match A");
  }
  for (const Complex& lambda : eigenvalues_of(A)) {
    if (lambda.real() >= -margin && !pbh_full_rank(A, B, lambda)) return false;
  }
  return true;
}

bool is_controllable(const Matrix& A, const Matrix& B) {
  require_square(A, "A");
  if (B.rows() != A.rows()) {
    throw Error(ErrorKind::InvalidInput, "B dimension does not match A");
  }
  for (const Complex& lambda : eigenvalues_of(A)) {
    if (!pbh_full_rank(A, B, lambda)) return false;
  }
  return true;
}

Eigen::Index numerical_rank(const Matrix& M, double tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0)) ++rank;
  }
  return rank;
}

}  // namespace lqdeceive
