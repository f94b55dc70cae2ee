#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lqdeceive/dual.hpp"
#include "oracles.hpp"

namespace lqdeceive {
namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

DualProblem scalar_dual(double N_bar = 0.0, double gamma = 1e-4) {
  return {{scalar(-1.0), scalar(1.0), scalar(1.0)}, scalar(1.0), scalar(1.0),
          scalar(N_bar), scalar(gamma)};
}

// B_a = B_u E so the range condition holds by construction. Draws whose
// nominal ||Z||_F exceeds 100 (B_u close to losing controllability) are
// redrawn: their costs carry roundoff far above what a central difference
// with h = 1e-6 can resolve.
DualProblem random_dual(std::uint64_t seed, int n, int m_u, int m_a, double gamma = 1e-2) {
  std::mt19937_64 rng(seed);
  while (true) {
    DualProblem d;
    d.plant.A = oracle::randn(rng, n, n);
    d.plant.B_u = oracle::randn(rng, n, m_u);
    d.plant.B_a = d.plant.B_u * oracle::randn(rng, m_u, m_a);
    d.Q = oracle::random_spd(rng, n);
    d.M = oracle::random_spd(rng, m_u);
    d.N_bar = Matrix::Zero(m_u, n);
    d.Gamma = gamma * Matrix::Identity(m_a, m_a);
    if (nominal_controller(d).Z.norm() <= 100.0) {
      return d;
    }
  }
}

TEST(DualNominal, ScalarClosedForms) {
  EXPECT_NEAR(nominal_controller(scalar_dual()).N(0, 0), 1.0 - std::sqrt(2.0), 1e-12);
  DualProblem d = scalar_dual();
  d.plant.A = scalar(0.0);
  EXPECT_NEAR(nominal_controller(d).N(0, 0), -1.0, 1e-12);
}

TEST(DualNominal, RandomClosedLoopHurwitz) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DualProblem d = random_dual(seed, 3, 2, 1);
    const ControllerGain g = nominal_controller(d);
    EXPECT_LT(oracle::abscissa(d.plant.A + d.plant.B_u * g.N), 0.0);
  }
}

TEST(DualPoisoned, ScalarClosedForm) {
  const ControllerGain g = poisoned_controller(scalar_dual(), scalar(0.5));
  EXPECT_NEAR(g.Z(0, 0), (std::sqrt(5.0) - 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(g.N(0, 0), -(std::sqrt(5.0) - 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(poisoned_controller(scalar_dual(), scalar(0.0)).N(0, 0),
              nominal_controller(scalar_dual()).N(0, 0), 1e-14);
}

TEST(DualPoisoned, FeasibleForEveryRandomGainUnderRangeCondition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 1 + seed % 4;
    const DualProblem d = random_dual(seed, n, 1 + seed % 2, 1 + (seed / 3) % 2);
    ASSERT_TRUE(range_condition(d.plant.B_a, d.plant.B_u));
    std::mt19937_64 rng(seed + 500);
    for (int k = 0; k < 10; ++k) {
      const Matrix L = 3.0 * oracle::randn(rng, d.plant.m_a(), n);
      EXPECT_NO_THROW({
        const ControllerGain g = poisoned_controller(d, L);
        EXPECT_LT(oracle::abscissa(d.plant.A + d.plant.B_a * L + d.plant.B_u * g.N), 0.0);
      }) << "seed " << seed << " draw " << k;
    }
  }
}

TEST(DualRange, Examples) {
  Matrix e1 = Matrix::Zero(2, 1), e2 = Matrix::Zero(2, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  EXPECT_TRUE(range_condition(e1, e1));
  EXPECT_FALSE(range_condition(e2, e1));
  std::mt19937_64 rng(9);
  const Matrix Bu = oracle::randn(rng, 4, 2);
  EXPECT_TRUE(range_condition(Bu * oracle::randn(rng, 2, 3), Bu));
  EXPECT_THROW(range_condition(Matrix::Ones(3, 1), e1), Error);
}

TEST(DualGradient, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DualProblem d = random_dual(seed, 1 + seed % 4, 1 + seed % 2, 1 + (seed / 2) % 2);
    d.N_bar = 0.5 * nominal_controller(d).N;
    std::mt19937_64 rng(seed + 99);
    const Matrix L = 0.3 * oracle::randn(rng, d.plant.m_a(), d.plant.n());
    const Matrix g = dual_gradient(d, L);
    const Matrix fd = oracle::central_difference(
        [&](const Matrix& X) { return dual_cost(d, X); }, L, 1e-6);
    EXPECT_LE((g - fd).norm() / std::max(1.0, g.norm()), 1e-5) << "seed " << seed;
  }
}

TEST(DualBsor, StationaryStartStays) {
  const DualProblem base = scalar_dual();
  const DualProblem d = scalar_dual(nominal_controller(base).N(0, 0));
  BsorConfig cfg;
  cfg.omega = 0.1;
  const DeceptionResult r = dual_bsor_solve(d, cfg);
  EXPECT_EQ(r.status, BsorStatus::kConverged);
  EXPECT_LT(r.gain_hat.norm(), 1e-12);
}

TEST(DualBsor, ScalarSuppressesLearnedGain) {
  BsorConfig cfg;
  cfg.omega = 1e-3;
  cfg.tol = 1e-8;
  const DualProblem d = scalar_dual(0.0, 1e-4);
  const DeceptionResult r = dual_bsor_solve(d, cfg);
  ASSERT_EQ(r.status, BsorStatus::kConverged) << r.message;
  EXPECT_LT(std::abs(poisoned_controller(d, r.gain_hat).N(0, 0)),
            std::abs(nominal_controller(d).N(0, 0)));
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_LE(r.trace[i].cost, r.trace[i - 1].cost + 1e-12);
  }
}

TEST(DualBsor, RejectsDeepStabilize) {
  BsorConfig cfg;
  cfg.init = InitMode::deep(10.0);
  try {
    dual_bsor_solve(scalar_dual(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(DualBsor, WarnsWithoutRangeCondition) {
  DualProblem d = scalar_dual();
  d.plant.A = -Matrix::Identity(2, 2);
  d.plant.B_u = Matrix::Zero(2, 1);
  d.plant.B_u(0, 0) = 1.0;
  d.plant.B_a = Matrix::Zero(2, 1);
  d.plant.B_a(1, 0) = 1.0;
  d.Q = Matrix::Identity(2, 2);
  d.N_bar = Matrix::Zero(1, 2);
  BsorConfig cfg;
  cfg.max_iter = 10;
  const DeceptionResult r = dual_bsor_solve(d, cfg);
  EXPECT_NE(r.message.find("Ran(B_a)"), std::string::npos) << r.message;
}

}  // namespace
}  // namespace lqdeceive
