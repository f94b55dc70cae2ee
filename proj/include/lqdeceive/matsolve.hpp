#pragma once

#include <Eigen/Dense>

#include "lqdeceive/error.hpp"

namespace lqdeceive {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default floor used by every "strictly stable" check: a matrix counts as
/// Hurwitz when its spectral abscissa is below -kDefaultHurwitzMargin.
inline constexpr double kDefaultHurwitzMargin = 1e-9;

struct SolveCertificate {
  double residual_norm = 0.0;
  /// -alpha of the closed-loop matrix associated with the solution.
  double hurwitz_margin = 0.0;
  /// Stabilizing solution found, which makes it the minimal one.
  bool minimality_certified = false;
};

struct RiccatiSolution {
  Matrix X;
  SolveCertificate cert;
};

/// Selects which Lyapunov equation solve_lyapunov targets.
enum class LyapunovForm {
  kStandard,    // A^T X + X A + C = 0
  kTransposed,  // A X + X A^T + C = 0
};

double spectral_abscissa(const Matrix& A);

bool is_hurwitz(const Matrix& A, double margin = kDefaultHurwitzMargin);

Matrix symmetrize(const Matrix& X);

bool is_symmetric(const Matrix& X, double tol = 1e-10);

/// Cholesky-based definiteness test.
bool is_positive_definite(const Matrix& X);

double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);

/// Solves the Lyapunov equation selected by `form`. A must be Hurwitz (up to
/// `margin`) and C symmetric; the result is symmetrized.
Matrix solve_lyapunov(const Matrix& A, const Matrix& C,
                      LyapunovForm form = LyapunovForm::kStandard,
                      double margin = kDefaultHurwitzMargin);

/// Frobenius norm of A^T X + X A + C (or the transposed form).
double lyapunov_residual(const Matrix& A, const Matrix& X, const Matrix& C,
                         LyapunovForm form = LyapunovForm::kStandard);

/// Stabilizing solution of A^T X + X A + Q - X G X = 0 for symmetric G of any
/// sign, i.e. A - G X Hurwitz. Throws NoStabilizingSolution when the
/// Hamiltonian has eigenvalues on the imaginary axis or the stable subspace
/// is not a graph.
RiccatiSolution solve_riccati(const Matrix& A, const Matrix& G,
                              const Matrix& Q,
                              double margin = kDefaultHurwitzMargin);

double riccati_residual(const Matrix& A, const Matrix& G, const Matrix& Q,
                        const Matrix& X);

/// Maximizing ARE: A^T P + P A + Q + P B R^-1 B^T P = 0 with
/// A + B R^-1 B^T P Hurwitz. Requires A Hurwitz.
RiccatiSolution solve_are_max(const Matrix& A, const Matrix& B,
                              const Matrix& Q, const Matrix& R,
                              double margin = kDefaultHurwitzMargin);

/// Minimizing (LQR) ARE: A^T Z + Z A + Q - Z B R^-1 B^T Z = 0 with
/// A - B R^-1 B^T Z Hurwitz.
RiccatiSolution solve_are_min(const Matrix& A, const Matrix& B,
                              const Matrix& Q, const Matrix& R_ctrl,
                              double margin = kDefaultHurwitzMargin);

/// PBH test restricted to modes with real part >= -margin.
bool is_stabilizable(const Matrix& A, const Matrix& B,
                     double margin = kDefaultHurwitzMargin);

/// PBH test over every mode.
bool is_controllable(const Matrix& A, const Matrix& B);

/// Numerical rank from singular values above tol * sigma_max.
Eigen::Index numerical_rank(const Matrix& M, double tol = 1e-9);

}  // namespace lqdeceive
