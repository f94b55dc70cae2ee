#include <cstdlib>
#include <random>
#include <sstream>

#include "lqdeceive/cli.hpp"

namespace lqdeceive::cli {

using io::Json;

namespace {

const Json& section(const Json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_object()) {
    throw Error(ErrorKind::InvalidInput, std::string("config is missing the \"") + key +
                                             "\" section");
  }
  return doc.at(key);
}

Matrix required_matrix(const Json& sec, const char* key, const char* where) {
  if (!sec.contains(key)) {
    throw Error(ErrorKind::InvalidInput,
                std::string(where) + "." + key + " is required");
  }
  return io::matrix_from_json(sec.at(key), std::string(where) + "." + key);
}

template <typename T>
T value_or(const Json& sec, const char* key, T fallback) {
  if (!sec.contains(key) || sec.at(key).is_null()) return fallback;
  try {
    return sec.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorKind::InvalidInput, std::string(key) + " has the wrong type");
  }
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::NonSymmetricInput:
    case ErrorKind::NotHurwitzInput:
    case ErrorKind::ShapeMismatch:
      return kExitInput;
    case ErrorKind::NoStabilizingSolution:
      return kExitNoStabilizingSolution;
    case ErrorKind::OutOfDomain:
    case ErrorKind::SpoofedPlantUnstable:
    case ErrorKind::ShiftTooSmall:
    case ErrorKind::NotControllable:
    case ErrorKind::NominalAttackMissing:
      return kExitInfeasible;
    case ErrorKind::NotHurwitz:
    case ErrorKind::NotStabilizable:
    case ErrorKind::EigenFailure:
    case ErrorKind::Blowup:
    case ErrorKind::PolicyDestabilized:
    case ErrorKind::RankDeficientData:
      return kExitNumerical;
  }
  return kExitNumerical;
}

RunConfig make_config(Json doc, Overrides overrides, std::filesystem::path out_dir) {
  if (!doc.is_object()) throw Error(ErrorKind::InvalidInput, "config must be a JSON object");
  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != kSchemaVersion) {
    std::ostringstream os;
    os << "config must declare \"schema_version\": " << kSchemaVersion;
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  RunConfig cfg;
  cfg.doc = std::move(doc);
  cfg.overrides = std::move(overrides);
  cfg.out_dir = std::move(out_dir);
  return cfg;
}

std::uint64_t RunConfig::seed() const {
  if (overrides.seed) return *overrides.seed;
  if (!doc.contains("seed")) return 0;
  const Json& s = doc.at("seed");
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
    throw Error(ErrorKind::InvalidInput, "seed must be an unsigned 64-bit integer");
  }
  return s.get<std::uint64_t>();
}

Plant RunConfig::plant(bool require_hurwitz) const {
  const Json& sec = section(doc, "plant");
  Plant p{required_matrix(sec, "A", "plant"), required_matrix(sec, "B_u", "plant"),
          required_matrix(sec, "B_a", "plant")};
  p.validate(require_hurwitz);
  return p;
}

AdversaryObjective RunConfig::objective() const {
  const Json& sec = section(doc, "objective");
  return {required_matrix(sec, "Q", "objective"), required_matrix(sec, "R", "objective")};
}

Matrix parse_regularizer(const Json& sec, Eigen::Index dim) {
  if (sec.contains("Gamma")) return io::matrix_from_json(sec.at("Gamma"), "Gamma");
  if (sec.contains("gamma")) {
    if (!sec.at("gamma").is_number()) throw Error(ErrorKind::InvalidInput, "gamma must be a number");
    const double g = sec.at("gamma").get<double>();
    if (g < 0.0) throw Error(ErrorKind::InvalidInput, "gamma must be non-negative");
    return std::max(g, kGammaFloor) * Matrix::Identity(dim, dim);
  }
  throw Error(ErrorKind::InvalidInput, "a regularizer \"Gamma\" or \"gamma\" is required");
}

DeceptionProblem RunConfig::problem() const {
  DeceptionProblem prob;
  prob.plant = plant();
  prob.objective = objective();
  const Json& sec = section(doc, "deception");
  prob.K_bar = sec.contains("K_bar") ? io::matrix_from_json(sec.at("K_bar"), "deception.K_bar")
                                     : Matrix::Zero(prob.plant.m_a(), prob.plant.n());
  prob.Gamma = parse_regularizer(sec, prob.plant.m_u());
  prob.validate();
  return prob;
}

InitMode parse_init(const std::string& text) {
  if (text == "zero") return InitMode::zero();
  if (text == "deep") return InitMode::deep();
  const std::string prefix = "deep:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string number = text.substr(prefix.size());
    char* end = nullptr;
    const double sigma = std::strtod(number.c_str(), &end);
    if (end != number.c_str() && *end == '\0' && sigma > 0.0) return InitMode::deep(sigma);
  }
  throw Error(ErrorKind::InvalidInput, "init must be \"zero\" or \"deep:SIGMA\" with SIGMA > 0");
}

BsorConfig RunConfig::solver() const {
  const Json empty = Json::object();
  const Json& sec = doc.contains("solver") ? doc.at("solver") : empty;
  BsorConfig c;
  c.omega = overrides.omega.value_or(value_or(sec, "omega", c.omega));
  c.tol = overrides.tol.value_or(value_or(sec, "tol", c.tol));
  c.max_iter = overrides.max_iter.value_or(value_or(sec, "max_iter", c.max_iter));
  c.snapshot_every = value_or(sec, "snapshot_every", c.snapshot_every);
  c.init = parse_init(overrides.init.value_or(value_or<std::string>(sec, "init", "zero")));
  if (sec.contains("lipschitz_hint") && !sec.at("lipschitz_hint").is_null()) {
    c.lipschitz_hint = value_or(sec, "lipschitz_hint", 0.0);
  }
  if (sec.contains("initial_gain")) {
    c.initial_gain = io::matrix_from_json(sec.at("initial_gain"), "solver.initial_gain");
  }
  c.validate();
  return c;
}

MismatchSpec RunConfig::mismatch() const {
  const Json& sec = section(doc, "mismatch");
  return {required_matrix(sec, "Q_hat", "mismatch"), required_matrix(sec, "R_hat", "mismatch")};
}

double RunConfig::mismatch_epsilon() const {
  const Json& sec = section(doc, "mismatch");
  return value_or(sec, "epsilon", 1e-3);
}

DualProblem RunConfig::dual() const {
  DualProblem d;
  d.plant = plant(/*require_hurwitz=*/false);
  const Json& sec = section(doc, "dual");
  d.Q = sec.contains("Q") ? io::matrix_from_json(sec.at("Q"), "dual.Q") : objective().Q;
  d.M = required_matrix(sec, "M", "dual");
  d.N_bar = sec.contains("N_bar") ? io::matrix_from_json(sec.at("N_bar"), "dual.N_bar")
                                  : Matrix::Zero(d.plant.m_u(), d.plant.n());
  d.Gamma = parse_regularizer(sec, d.plant.m_a());
  d.validate();
  return d;
}

TrajectorySpec RunConfig::trajectory() const {
  const Json empty = Json::object();
  const Json& sec = doc.contains("simulation") ? doc.at("simulation") : empty;
  const Eigen::Index n = plant(/*require_hurwitz=*/false).n();
  TrajectorySpec spec;
  spec.x0 = sec.contains("x0") ? io::vector_from_json(sec.at("x0"), "simulation.x0")
                               : Vector::Ones(n);
  spec.horizon = value_or(sec, "horizon", spec.horizon);
  spec.dt = value_or(sec, "dt", spec.dt);
  spec.amplitude = value_or(sec, "amplitude", spec.amplitude);
  spec.num_sinusoids = value_or(sec, "num_sinusoids", spec.num_sinusoids);
  spec.min_frequency = value_or(sec, "min_frequency", spec.min_frequency);
  spec.max_frequency = value_or(sec, "max_frequency", spec.max_frequency);
  spec.seed = seed();
  spec.validate(n);
  return spec;
}

Plant generate_plant(Eigen::Index n, Eigen::Index m_u, Eigen::Index m_a,
                     std::uint64_t seed, bool range_mode) {
  if (n < 1 || m_u < 1 || m_a < 1) {
    throw Error(ErrorKind::InvalidInput, "n, m_u and m_a must all be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    Matrix M(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) M(i, j) = normal(rng);
    return M;
  };
  Plant p;
  p.A = random(n, n);
  const double margin = 0.1 + 0.9 * uniform(rng);
  p.A -= (spectral_abscissa(p.A) + margin) * Matrix::Identity(n, n);
  // Guard against rounding in the eigenvalue computation.
  while (spectral_abscissa(p.A) > -0.1) p.A -= 1e-6 * Matrix::Identity(n, n);
  p.B_u = random(n, m_u);
  p.B_a = range_mode ? Matrix(p.B_u * random(m_u, m_a)) : random(n, m_a);
  return p;
}

}  // namespace lqdeceive::cli
