#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lqdeceive/deception.hpp"

namespace lqdeceive {

/// Sample-path settings for simulating the spoofed plant.
struct TrajectorySpec {
  Vector x0;
  double horizon = 10.0;  // seconds
  double dt = 1e-3;       // fixed RK4 step
  /// Total amplitude of the exploration added to the attack channel; 0
  /// disables exploration.
  double amplitude = 1.0;
  /// Sinusoids per attack channel; 0 selects 2 (n(n+1)/2 + n m_a).
  int num_sinusoids = 0;
  double min_frequency = 0.1;   // rad/s
  double max_frequency = 50.0;  // rad/s
  std::uint64_t seed = 0;

  void validate(Eigen::Index n) const;
};

/// Sum of sinusoids, one independent set per attack channel.
struct ExplorationSignal {
  Matrix amplitude;  // m_a x k
  Matrix frequency;  // m_a x k
  Matrix phase;      // m_a x k

  Vector at(double t) const;
};

ExplorationSignal make_exploration(const TrajectorySpec& spec, Eigen::Index n,
                                   Eigen::Index m_a);

struct Trajectory {
  std::vector<double> time;
  Matrix states;   // n x samples
  Matrix attacks;  // m_a x samples, applied a(t)
  Matrix controls; // m_u x samples, u(t) = Lambda x(t)
  /// Running integrals from t = 0, column-major vec per sample:
  /// int x x^T dt (n*n rows) and int a x^T dt (m_a*n rows).
  Matrix state_gram;
  Matrix attack_state;
};

/// Fixed-step RK4 on x' = (A + B_u Lambda) x + B_a (attack_gain x + e(t)).
/// Throws Blowup once ||x|| exceeds 1e12.
Trajectory simulate_trajectory(const Plant& plant, const Matrix& gain,
                               const Matrix& attack_gain, const TrajectorySpec& spec);

enum class LearnerStatus { kConverged, kMaxIterations, kPolicyDestabilized };

std::string to_string(LearnerStatus status);

struct LearnerIteration {
  Matrix gain;
  /// Policy-evaluation matrix of `gain`; empty for the final improved gain.
  Matrix value;
  /// ||gain - reference||_F, NaN when no reference is available.
  double distance = 0.0;
};

struct LearnerTrace {
  std::vector<LearnerIteration> iterations;
  Matrix reference;  // K_u(Lambda) when the spoofed ARE is solvable
  bool converged = false;
  LearnerStatus status = LearnerStatus::kMaxIterations;

  const Matrix& final_gain() const { return iterations.back().gain; }
};

struct LearnerOptions {
  double tol = 1e-10;
  int max_iter = 100;
};

/// Model-based policy iteration on the spoofed plant: evaluate K_j by a
/// Lyapunov solve, improve with K_{j+1} = R^-1 B_a^T P_j.
LearnerTrace kleinman_pi_max(const Plant& plant, const Matrix& gain,
                             const AdversaryObjective& objective, const Matrix& K0,
                             const LearnerOptions& options = {});

/// What the data-driven learner is told about the plant.
enum class LearnerInformation {
  kUnknownDynamics,  // neither A nor B_a known
  kKnownInputMatrix, // B_a known, A unknown
};

struct DataDrivenOptions {
  LearnerInformation information = LearnerInformation::kUnknownDynamics;
  double interval = 0.02;  // seconds per integral temporal-difference equation
  double tol = 1e-7;
  int max_iter = 50;
};

/// Off-policy integral policy iteration from one trajectory of the spoofed
/// plant, generated with behaviour a = K0 x + e(t). The learner uses only the
/// sampled x and a, the weights (Q, R) and, if allowed, B_a.
LearnerTrace datadriven_pi(const Plant& plant, const Matrix& gain,
                           const AdversaryObjective& objective,
                           const TrajectorySpec& spec, const Matrix& K0,
                           const DataDrivenOptions& options = {});

}  // namespace lqdeceive
