#include "lqdeceive/adversary.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace lqdeceive {

namespace {

constexpr double kBlowupNorm = 1e12;

std::optional<Matrix> predicted_attack(const Plant& plant,
                                       const AdversaryObjective& objective,
                                       const Matrix& gain) {
  try {
    const Matrix P = spoofed_value(plant, objective, gain);
    return Matrix(Eigen::LLT<Matrix>(objective.R).solve(plant.B_a.transpose() * P));
  } catch (const Error&) {
    return std::nullopt;
  }
}

double distance_to(const Matrix& K, const Matrix& reference) {
  if (reference.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return (K - reference).norm();
}

void require_gain(const Matrix& K, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
  if (K.rows() != rows || K.cols() != cols || !K.allFinite()) {
    std::ostringstream os;
    os << name << " must be a finite " << rows << "x" << cols << " matrix";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
}

}  // namespace

std::string to_string(LearnerStatus status) {
  switch (status) {
    case LearnerStatus::kConverged: return "Converged";
    case LearnerStatus::kMaxIterations: return "MaxIterations";
    case LearnerStatus::kPolicyDestabilized: return "PolicyDestabilized";
  }
  return "Unknown";
}

void TrajectorySpec::validate(Eigen::Index n) const {
  if (x0.size() != n || !x0.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "x0 must be a finite vector of length n");
  }
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidInput, "dt must be positive");
  if (!(horizon >= dt)) throw Error(ErrorKind::InvalidInput, "horizon must cover one step");
  if (!(amplitude >= 0.0)) throw Error(ErrorKind::InvalidInput, "amplitude must be >= 0");
  if (num_sinusoids < 0) throw Error(ErrorKind::InvalidInput, "num_sinusoids must be >= 0");
  if (!(min_frequency > 0.0 && max_frequency > min_frequency)) {
    throw Error(ErrorKind::InvalidInput, "frequency band must satisfy 0 < min < max");
  }
}

Vector ExplorationSignal::at(double t) const {
  Vector e = Vector::Zero(amplitude.rows());
  for (Eigen::Index c = 0; c < amplitude.rows(); ++c) {
    for (Eigen::Index k = 0; k < amplitude.cols(); ++k) {
      e(c) += amplitude(c, k) * std::sin(frequency(c, k) * t + phase(c, k));
    }
  }
  return e;
}

ExplorationSignal make_exploration(const TrajectorySpec& spec, Eigen::Index n,
                                   Eigen::Index m_a) {
  const Eigen::Index k =
      spec.num_sinusoids > 0 ? spec.num_sinusoids : 2 * (n * (n + 1) / 2 + n * m_a);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> freq(spec.min_frequency, spec.max_frequency);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ExplorationSignal sig;
  sig.amplitude = Matrix::Constant(m_a, k, spec.amplitude / std::sqrt(double(k)));
  sig.frequency.resize(m_a, k);
  sig.phase.resize(m_a, k);
  for (Eigen::Index c = 0; c < m_a; ++c) {
    for (Eigen::Index j = 0; j < k; ++j) {
      sig.frequency(c, j) = freq(rng);
      sig.phase(c, j) = phase(rng);
    }
  }
  return sig;
}

Trajectory simulate_trajectory(const Plant& plant, const Matrix& gain,
                               const Matrix& attack_gain, const TrajectorySpec& spec) {
  plant.validate(/*require_hurwitz=*/false);
  const Eigen::Index n = plant.n(), m_a = plant.m_a();
  require_gain(gain, plant.m_u(), n, "Lambda");
  require_gain(attack_gain, m_a, n, "attack gain");
  spec.validate(n);

  const ExplorationSignal explore = make_exploration(spec, n, m_a);
  const Matrix spoofed = plant.A + plant.B_u * gain;
  const auto steps = static_cast<Eigen::Index>(std::llround(spec.horizon / spec.dt));

  // Augmented state z = [x; vec(int x x^T); vec(int a x^T)].
  const Eigen::Index dim = n + n * n + m_a * n;
  auto attack_at = [&](double t, const Vector& x) -> Vector {
    Vector a = attack_gain * x;
    if (spec.amplitude > 0.0) a += explore.at(t);
    return a;
  };
  auto rhs = [&](double t, const Vector& z) {
    const Vector x = z.head(n);
    const Vector a = attack_at(t, x);
    Vector dz(dim);
    dz.head(n) = spoofed * x + plant.B_a * a;
    const Matrix xx = x * x.transpose();
    const Matrix ax = a * x.transpose();
    dz.segment(n, n * n) = Eigen::Map<const Vector>(xx.data(), n * n);
    dz.tail(m_a * n) = Eigen::Map<const Vector>(ax.data(), m_a * n);
    return dz;
  };

  Trajectory traj;
  traj.time.resize(steps + 1);
  traj.states.resize(n, steps + 1);
  traj.attacks.resize(m_a, steps + 1);
  traj.controls.resize(plant.m_u(), steps + 1);
  traj.state_gram.resize(n * n, steps + 1);
  traj.attack_state.resize(m_a * n, steps + 1);

  Vector z = Vector::Zero(dim);
  z.head(n) = spec.x0;
  const double h = spec.dt;
  for (Eigen::Index s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) * h;
    const Vector x = z.head(n);
    traj.time[s] = t;
    traj.states.col(s) = x;
    traj.attacks.col(s) = attack_at(t, x);
    traj.controls.col(s) = gain * x;
    traj.state_gram.col(s) = z.segment(n, n * n);
    traj.attack_state.col(s) = z.tail(m_a * n);
    if (s == steps) break;

    const Vector k1 = rhs(t, z);
    const Vector k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
    const Vector k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
    const Vector k4 = rhs(t + h, z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double norm = z.head(n).norm();
    if (!std::isfinite(norm) || norm > kBlowupNorm) {
      std::ostringstream os;
      os << "state norm exceeded 1e12 at t = " << t + h;
      throw Error(ErrorKind::Blowup, os.str());
    }
  }
  return traj;
}

LearnerTrace kleinman_pi_max(const Plant& plant, const Matrix& gain,
                             const AdversaryObjective& objective, const Matrix& K0,
                             const LearnerOptions& options) {
  plant.validate(/*require_hurwitz=*/false);
  objective.validate(plant.n(), plant.m_a());
  require_gain(gain, plant.m_u(), plant.n(), "Lambda");
  require_gain(K0, plant.m_a(), plant.n(), "K0");

  LearnerTrace trace;
  if (auto ref = predicted_attack(plant, objective, gain)) trace.reference = *ref;

  const Matrix spoofed = plant.A + plant.B_u * gain;
  const Eigen::LLT<Matrix> R_llt(objective.R);
  Matrix K = K0;
  for (int j = 0; j < options.max_iter; ++j) {
    const Matrix closed = spoofed + plant.B_a * K;
    if (!is_hurwitz(closed)) {
      trace.iterations.push_back({K, Matrix(), distance_to(K, trace.reference)});
      trace.status = LearnerStatus::kPolicyDestabilized;
      return trace;
    }
    const Matrix forcing =
        symmetrize(objective.Q - K.transpose() * objective.R * K);
    const Matrix P = solve_lyapunov(closed, forcing);
    trace.iterations.push_back({K, P, distance_to(K, trace.reference)});
    const Matrix next = R_llt.solve(plant.B_a.transpose() * P);
    const double change = (next - K).norm();
    K = next;
    if (change < options.tol) {
      trace.iterations.push_back({K, Matrix(), distance_to(K, trace.reference)});
      trace.converged = true;
      trace.status = LearnerStatus::kConverged;
      return trace;
    }
  }
  trace.iterations.push_back({K, Matrix(), distance_to(K, trace.reference)});
  trace.status = LearnerStatus::kMaxIterations;
  return trace;
}

LearnerTrace datadriven_pi(const Plant& plant, const Matrix& gain,
                           const AdversaryObjective& objective,
                           const TrajectorySpec& spec, const Matrix& K0,
                           const DataDrivenOptions& options) {
  plant.validate(/*require_hurwitz=*/false);
  objective.validate(plant.n(), plant.m_a());
  const Eigen::Index n = plant.n(), m_a = plant.m_a();
  require_gain(K0, m_a, n, "K0");
  if (!(options.interval >= spec.dt)) {
    throw Error(ErrorKind::InvalidInput, "learning interval must cover one step");
  }

  LearnerTrace trace;
  if (auto ref = predicted_attack(plant, objective, gain)) trace.reference = *ref;

  // Data from the spoofed plant under the behaviour policy K0 + exploration.
  const Trajectory data = simulate_trajectory(plant, gain, K0, spec);
  const auto per_interval =
      std::max<Eigen::Index>(1, std::llround(options.interval / spec.dt));
  const Eigen::Index intervals = (data.states.cols() - 1) / per_interval;

  const bool known_b = options.information == LearnerInformation::kKnownInputMatrix;
  const Eigen::Index n_value = n * (n + 1) / 2;
  const Eigen::Index unknowns = n_value + (known_b ? 0 : m_a * n);
  if (intervals < unknowns) {
    throw Error(ErrorKind::RankDeficientData, "fewer learning intervals than unknowns");
  }

  // Per-interval increments of x x^T and the two running integrals.
  std::vector<Matrix> d_gram(intervals), i_xx(intervals), i_ax(intervals);
  for (Eigen::Index k = 0; k < intervals; ++k) {
    const Eigen::Index s0 = k * per_interval, s1 = s0 + per_interval;
    const Vector x0 = data.states.col(s0), x1 = data.states.col(s1);
    d_gram[k] = x1 * x1.transpose() - x0 * x0.transpose();
    const Vector gxx = data.state_gram.col(s1) - data.state_gram.col(s0);
    const Vector gax = data.attack_state.col(s1) - data.attack_state.col(s0);
    i_xx[k] = Eigen::Map<const Matrix>(gxx.data(), n, n);
    i_ax[k] = Eigen::Map<const Matrix>(gax.data(), m_a, n);
  }

  const Matrix& Q = objective.Q;
  const Matrix& R = objective.R;
  const Eigen::LLT<Matrix> R_llt(R);
  Matrix K = K0;
  for (int j = 0; j < options.max_iter; ++j) {
    // x1'Px1 - x0'Px0 - 2 int (a - K x)' R K_next x dt = -int x'(Q - K'RK)x dt
    Matrix theta(intervals, unknowns);
    Vector target(intervals);
    const Matrix weight = Q - K.transpose() * R * K;
    for (Eigen::Index k = 0; k < intervals; ++k) {
      const Matrix W = i_ax[k].transpose() - i_xx[k] * K.transpose();  // n x m_a
      Matrix Y;  // coupling term written as tr(P Y) when B_a is known
      if (known_b) Y = W * plant.B_a.transpose();
      Eigen::Index col = 0;
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a; b < n; ++b) {
          double c = a == b ? d_gram[k](a, a) : 2.0 * d_gram[k](a, b);
          if (known_b) c -= 2.0 * (a == b ? Y(a, a) : Y(a, b) + Y(b, a));
          theta(k, col++) = c;
        }
      }
      if (!known_b) {
        const Matrix coeff = -2.0 * R * W.transpose();  // m_a x n
        for (Eigen::Index q = 0; q < n; ++q) {
          for (Eigen::Index p = 0; p < m_a; ++p) theta(k, col++) = coeff(p, q);
        }
      }
      target(k) = -(weight * i_xx[k]).trace();
    }

    const Vector scale = theta.colwise().norm().transpose();
    if ((scale.array() == 0.0).any()) {
      throw Error(ErrorKind::RankDeficientData, "regressor has an all-zero column");
    }
    const Matrix scaled = theta * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
      throw Error(ErrorKind::RankDeficientData,
                  "least-squares regressor is rank deficient; excitation too weak");
    }
    const Vector solution = scale.cwiseInverse().asDiagonal() * svd.solve(target);

    Matrix P(n, n);
    Eigen::Index col = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = a; b < n; ++b) {
        P(a, b) = P(b, a) = solution(col++);
      }
    }
    Matrix next(m_a, n);
    if (known_b) {
      next = R_llt.solve(plant.B_a.transpose() * P);
    } else {
      for (Eigen::Index q = 0; q < n; ++q) {
        for (Eigen::Index p = 0; p < m_a; ++p) next(p, q) = solution(col++);
      }
    }

    // Policy evaluation of a stabilizing K_j yields P_j > 0; losing
    // definiteness signals that K_j left the stabilizing set.
    if (!is_positive_definite(P)) {
      trace.iterations.push_back({K, P, distance_to(K, trace.reference)});
      trace.status = LearnerStatus::kPolicyDestabilized;
      return trace;
    }
    trace.iterations.push_back({K, P, distance_to(K, trace.reference)});
    const double change = (next - K).norm();
    K = next;
    if (change < options.tol) {
      trace.iterations.push_back({K, Matrix(), distance_to(K, trace.reference)});
      trace.converged = true;
      trace.status = LearnerStatus::kConverged;
      return trace;
    }
  }
  trace.iterations.push_back({K, Matrix(), distance_to(K, trace.reference)});
  trace.status = LearnerStatus::kMaxIterations;
  return trace;
}

}  // namespace lqdeceive
