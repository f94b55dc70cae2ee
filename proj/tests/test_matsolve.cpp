#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lqdeceive/matsolve.hpp"
#include "oracles.hpp"

namespace lqdeceive {
namespace {

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

TEST(Lyapunov, MatchesKroneckerOracle) {
  for (int n = 1; n <= 6; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(100 * n + seed);
      const Matrix A = oracle::random_hurwitz(rng, n, 0.3);
      const Matrix C = oracle::random_spd(rng, n);
      EXPECT_LT(rel_err(solve_lyapunov(A, C), oracle::lyapunov_kron(A, C)), 1e-10)
          << "n=" << n << " seed=" << seed;
      EXPECT_LT(rel_err(solve_lyapunov(A, C, LyapunovForm::kTransposed),
                        oracle::lyapunov_kron_transposed(A, C)),
                1e-10);
    }
  }
}

TEST(Lyapunov, IndefiniteRightHandSide) {
  std::mt19937_64 rng(7);
  const Matrix A = oracle::random_hurwitz(rng, 4);
  Matrix C = oracle::randn(rng, 4, 4);
  C = (C + C.transpose()).eval();
  const Matrix X = solve_lyapunov(A, C);
  EXPECT_LT(lyapunov_residual(A, X, C), 1e-10 * C.norm());
  EXPECT_LT(rel_err(X, oracle::lyapunov_kron(A, C)), 1e-10);
}

TEST(Lyapunov, RejectsUnstableMatrix) {
  Matrix A(2, 2);
  A << 0.1, 1, 0, -1;
  try {
    solve_lyapunov(A, Matrix::Identity(2, 2));
    FAIL() << "expected NotHurwitz";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHurwitz);
  }
}

TEST(Lyapunov, RejectsNonSymmetricForcing) {
  Matrix C(2, 2);
  C << 1, 2, 0, 1;
  try {
    solve_lyapunov(-Matrix::Identity(2, 2), C);
    FAIL() << "expected NonSymmetricInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonSymmetricInput);
  }
}

TEST(AreMax, ScalarExampleClosedForm) {
  const Matrix A = Matrix::Constant(1, 1, -1.0);
  const Matrix B = Matrix::Constant(1, 1, 1.0);
  const Matrix Q = Matrix::Constant(1, 1, 1.0);
  const RiccatiSolution s = solve_are_max(A, B, Q, Matrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(s.X(0, 0), 2.0 - std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.X(0, 0) / 2.0, 1.0 - std::sqrt(0.5), 1e-12);
  EXPECT_TRUE(s.cert.minimality_certified);
  EXPECT_NEAR(s.cert.hurwitz_margin, std::sqrt(0.5), 1e-12);
}

TEST(AreMax, ScalarWithoutSolution) {
  try {
    solve_are_max(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0),
                  Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5));
    FAIL() << "expected NoStabilizingSolution";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoStabilizingSolution);
  }
}

TEST(AreMax, ScalarSweepAgainstClosedForm) {
  for (double a : {-0.3, -1.0, -2.5}) {
    for (double r : {0.5, 1.0, 4.0, 20.0}) {
      const double p = oracle::scalar_are_max(a, 1.0, 1.0, r);
      if (std::isnan(p) || a * a - 1.0 / r < 1e-6) continue;
      const RiccatiSolution s =
          solve_are_max(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, 1.0),
                        Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, r));
      EXPECT_NEAR(s.X(0, 0), p, 1e-10 * std::max(1.0, p)) << "a=" << a << " r=" << r;
    }
  }
}

TEST(AreMax, RandomInstancesMatchPolicyIterationOracle) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const int n = 2 + seed % 4;
    const int m = 1 + seed % 2;
    const Matrix A = oracle::random_hurwitz(rng, n);
    const Matrix B = oracle::randn(rng, n, m);
    const Matrix Q = oracle::random_spd(rng, n);
    Matrix R = Matrix::Identity(m, m);
    Matrix P_ref;
    for (int k = 0; k < 40 && P_ref.size() == 0; ++k) {
      R *= 2.0;
      P_ref = oracle::are_max_kleinman(A, B, Q, R);
    }
    ASSERT_GT(P_ref.size(), 0);
    const RiccatiSolution s = solve_are_max(A, B, Q, R);
    EXPECT_LT(rel_err(s.X, P_ref), 1e-8) << "seed " << seed;
    EXPECT_TRUE(is_hurwitz(A + B * R.inverse() * B.transpose() * s.X));
    EXPECT_TRUE(is_positive_definite(s.X));
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(AreMax, RequiresHurwitzPlant) {
  try {
    solve_are_max(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0),
                  Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0));
    FAIL() << "expected NotHurwitzInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHurwitzInput);
  }
}

TEST(AreMin, RandomInstancesMatchKleinmanOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const int n = 1 + seed % 5;
    const int m = 1 + seed % 2;
    Matrix A = oracle::randn(rng, n, n);
    const Matrix B = oracle::randn(rng, n, m);
    const Matrix Q = oracle::random_spd(rng, n);
    const Matrix R = oracle::random_spd(rng, m);
    const RiccatiSolution s = solve_are_min(A, B, Q, R);
    const Matrix Acl = A - B * R.inverse() * B.transpose() * s.X;
    EXPECT_LT(oracle::abscissa(Acl), 0.0);
    EXPECT_LT(riccati_residual(A, B * R.inverse() * B.transpose(), Q, s.X),
              1e-8 * std::max(1.0, s.X.norm()));
    // Kleinman from a perturbed stabilizing gain reaches the same Z.
    const Matrix K0 = R.inverse() * B.transpose() * s.X * 1.05;
    if (oracle::abscissa(A - B * K0) < 0.0) {
      EXPECT_LT(rel_err(s.X, oracle::are_min_kleinman(A, B, Q, R, K0)), 1e-8);
    }
  }
}

TEST(AreMin, ScalarClosedFormAndMonotoneInQ) {
  double previous = -1.0;
  for (double q : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const RiccatiSolution s =
        solve_are_min(Matrix::Constant(1, 1, 99.0), Matrix::Constant(1, 1, 1.0),
                      Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, 1.0));
    EXPECT_NEAR(s.X(0, 0), oracle::scalar_are_min(99.0, 1.0, q, 1.0), 1e-10 * s.X(0, 0));
    EXPECT_GE(s.X(0, 0), previous);
    previous = s.X(0, 0);
  }
}

TEST(AreMin, UnstabilizableModeIsReported) {
  Matrix A(2, 2);
  A << 1, 0, 0, -1;
  Matrix B(2, 1);
  B << 0, 1;
  EXPECT_FALSE(is_stabilizable(A, B));
  try {
    solve_are_min(A, B, Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    FAIL() << "expected NotStabilizable";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotStabilizable);
  }
}

TEST(Riccati, GenericIndefiniteQuadraticTerm) {
  // Same solver covers both signs of G; check a mixed-sign case by residual.
  std::mt19937_64 rng(3);
  const Matrix A = oracle::random_hurwitz(rng, 3, 1.0);
  Matrix G = Matrix::Zero(3, 3);
  G.diagonal() << 0.2, -0.1, 0.05;
  const Matrix Q = Matrix::Identity(3, 3);
  const RiccatiSolution s = solve_riccati(A, G, Q);
  EXPECT_LT(riccati_residual(A, G, Q, s.X), 1e-10);
  EXPECT_LT(oracle::abscissa(A - G * s.X), 0.0);
}

TEST(Structure, ControllabilityAndRank) {
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  Matrix b(2, 1);
  b << 0, 1;
  EXPECT_TRUE(is_controllable(A, b));
  b << 1, 0;
  EXPECT_FALSE(is_controllable(A, b));
  Matrix M(3, 2);
  M << 1, 2, 2, 4, 3, 6;
  EXPECT_EQ(numerical_rank(M), 1);
  EXPECT_EQ(numerical_rank(Matrix::Identity(3, 3)), 3);
}

TEST(Structure, SpectralHelpers) {
  Matrix A(2, 2);
  A << -1, 5, 0, -2;
  EXPECT_NEAR(spectral_abscissa(A), -1.0, 1e-14);
  EXPECT_TRUE(is_hurwitz(A));
  EXPECT_FALSE(is_hurwitz(-A));
  Matrix S(2, 2);
  S << 2, 1, 1, 2;
  EXPECT_NEAR(min_eigenvalue(S), 1.0, 1e-14);
  EXPECT_NEAR(max_eigenvalue(S), 3.0, 1e-14);
  EXPECT_TRUE(is_positive_definite(S));
  EXPECT_FALSE(is_positive_definite(-S));
  EXPECT_TRUE(is_symmetric(S));
}

}  // namespace
}  // namespace lqdeceive
