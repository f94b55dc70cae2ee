#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdlib>
#include <functional>
#include <iostream>

#include "lqdeceive/cli.hpp"

namespace lqdeceive::cli {

using io::Json;

namespace {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("LQDECEIVE_LOG");
    if (env == nullptr) return LogLevel::kError;
    const std::string v(env);
    if (v == "debug") return LogLevel::kDebug;
    if (v == "info") return LogLevel::kInfo;
    return LogLevel::kError;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  if (level > log_level()) return;
  static constexpr const char* kNames[] = {"error", "info", "debug"};
  std::cerr << "lqdeceive[" << kNames[static_cast<int>(level)] << "] " << msg << "\n";
}

Json spectrum_json(const Matrix& A) {
  const Eigen::VectorXcd ev = A.eigenvalues();
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  Json out = Json::array();
  for (const auto& z : v) out.push_back(Json::array({io::number(z.real()), io::number(z.imag())}));
  return out;
}

Json certificate_json(const SolveCertificate& c) {
  return {{"residual_norm", io::number(c.residual_norm)},
          {"hurwitz_margin", io::number(c.hurwitz_margin)},
          {"minimality_certified", c.minimality_certified}};
}

Json stationarity_json(const StationarityResiduals& s) {
  return {{"riccati", io::number(s.value_equation)},
          {"lyapunov", io::number(s.adjoint_equation)},
          {"gain", io::number(s.gain_equation)}};
}

Json result_json(const DeceptionResult& r, bool with_iterates) {
  Json j = {{"status", to_string(r.status)},
            {"message", r.message},
            {"iterations", r.trace.empty() ? 0 : r.trace.back().index},
            {"final_omega", io::number(r.final_omega)},
            {"step_size_bound_exceeded", r.step_size_bound_exceeded},
            {"omega_exceeds_lipschitz_bound", r.omega_exceeds_lipschitz_bound},
            {"stationarity", stationarity_json(r.stationarity)}};
  if (r.gain_hat.size() > 0) j["gain_hat"] = io::matrix_to_json(r.gain_hat);
  if (r.value_hat.size() > 0) j["value_hat"] = io::matrix_to_json(r.value_hat);
  if (r.adjoint_hat.size() > 0) j["adjoint_hat"] = io::matrix_to_json(r.adjoint_hat);
  if (!r.trace.empty()) j["final_cost"] = io::number(r.trace.back().cost);
  if (r.offending_gain) j["offending_gain"] = io::matrix_to_json(*r.offending_gain);
  if (with_iterates) {
    Json its = Json::array();
    for (const auto& it : r.trace) {
      if (!it.value) continue;
      Json e = {{"iter", it.index}, {"gain", io::matrix_to_json(it.gain)},
                {"value", io::matrix_to_json(*it.value)}};
      if (it.adjoint) e["adjoint"] = io::matrix_to_json(*it.adjoint);
      its.push_back(std::move(e));
    }
    j["snapshots"] = std::move(its);
  }
  return j;
}

int status_exit_code(BsorStatus s) {
  switch (s) {
    case BsorStatus::kConverged:
      return kExitOk;
    case BsorStatus::kMaxIterations:
      return kExitNumerical;
    case BsorStatus::kInfeasibleStart:
    case BsorStatus::kDomainExit:
      return kExitInfeasible;
  }
  return kExitNumerical;
}

bool emit_matrices(const RunConfig& cfg) {
  if (!cfg.doc.contains("solver")) return false;
  const Json& s = cfg.doc.at("solver");
  return s.contains("emit_matrices") && s.at("emit_matrices").is_boolean() &&
         s.at("emit_matrices").get<bool>();
}

// Shared wrapper: runs the body, converts library errors into a report with
// the error kind as status, and writes report.json.
int run_command(const RunConfig& cfg, const std::string& name,
                const std::function<int(Json&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  Json report = {{"command", name}, {"schema_version", kSchemaVersion}};
  int code = kExitOk;
  try {
    code = body(report);
    if (!report.contains("status")) report["status"] = "Ok";
  } catch (const Error& e) {
    report["status"] = std::string(to_string(e.kind()));
    report["message"] = e.what();
    code = exit_code_for(e.kind());
    log(LogLevel::kError, e.what());
  } catch (const Json::exception& e) {
    report["status"] = std::string(to_string(ErrorKind::InvalidInput));
    report["message"] = std::string("config: ") + e.what();
    code = kExitInput;
    log(LogLevel::kError, report["message"].get<std::string>());
  }
  if (cfg.overrides.timing) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    report["wall_clock_seconds"] = dt.count();
  }
  report["exit_code"] = code;
  try {
    io::write_json_file(cfg.out_dir / "report.json", report);
  } catch (const Error& e) {
    log(LogLevel::kError, e.what());
    return kExitInput;
  }
  log(LogLevel::kInfo, name + " finished with exit code " + std::to_string(code));
  return code;
}

Vector energy_x0(const RunConfig& cfg, Eigen::Index n) {
  if (cfg.doc.contains("energy") && cfg.doc.at("energy").contains("x0")) {
    return io::vector_from_json(cfg.doc.at("energy").at("x0"), "energy.x0");
  }
  if (cfg.doc.contains("simulation") && cfg.doc.at("simulation").contains("x0")) {
    return io::vector_from_json(cfg.doc.at("simulation").at("x0"), "simulation.x0");
  }
  return Vector::Ones(n);
}

// Lambda supplied in the config, or else the BSOR estimate. The second
// member carries a nonzero exit code when the solver did not converge.
std::pair<Matrix, int> deception_gain(const RunConfig& cfg, const char* sec_name,
                                      const DeceptionProblem& problem, Json& report) {
  if (cfg.doc.contains(sec_name) && cfg.doc.at(sec_name).contains("Lambda")) {
    return {io::matrix_from_json(cfg.doc.at(sec_name).at("Lambda"),
                                 std::string(sec_name) + ".Lambda"),
            kExitOk};
  }
  const DeceptionResult r = bsor_solve(problem, cfg.solver());
  report["design"] = result_json(r, false);
  return {r.gain_hat, status_exit_code(r.status)};
}

}  // namespace

int cmd_solve_attack(const RunConfig& cfg) {
  return run_command(cfg, "solve-attack", [&](Json& report) -> int {
    const Plant plant = cfg.plant();
    const NominalAttack na = nominal_attack(plant, cfg.objective());
    report["K_star"] = io::matrix_to_json(na.K_star);
    report["P"] = io::matrix_to_json(na.P);
    report["certificate"] = certificate_json(na.cert);
    report["closed_loop_spectrum"] = spectrum_json(plant.A + plant.B_a * na.K_star);
    return kExitOk;
  });
}

int cmd_design_deception(const RunConfig& cfg) {
  return run_command(cfg, "design-deception", [&](Json& report) -> int {
    const DeceptionProblem problem = cfg.problem();
    const Plant& plant = problem.plant;
    const BsorConfig solver = cfg.solver();
    log(LogLevel::kInfo, "running relaxation with omega=" + io::format_double(solver.omega));

    std::optional<NominalAttack> nominal;
    try {
      nominal = nominal_attack(plant, problem.objective);
      report["nominal"] = {{"K_star", io::matrix_to_json(nominal->K_star)},
                           {"P", io::matrix_to_json(nominal->P)}};
      const ExistenceCertificate ec = check_existence_condition(problem);
      report["existence"] = {{"holds", ec.holds},
                             {"lhs", io::number(ec.lhs)},
                             {"rhs", io::number(ec.rhs)},
                             {"S", io::matrix_to_json(ec.S)},
                             {"strengthened_eps", ec.strengthened_eps
                                                      ? io::number(*ec.strengthened_eps)
                                                      : Json("n/a")}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoStabilizingSolution &&
          e.kind() != ErrorKind::NominalAttackMissing) {
        throw;
      }
      report["nominal"] = std::string(to_string(ErrorKind::NoStabilizingSolution));
      report["existence"] = "n/a";
    }

    const DeceptionResult r = bsor_solve(problem, solver);
    report["result"] = result_json(r, emit_matrices(cfg));
    report["status"] = to_string(r.status);
    io::write_text_file(cfg.out_dir / "trace.csv", io::trace_csv(r));
    if (r.status == BsorStatus::kInfeasibleStart) return status_exit_code(r.status);

    const Matrix K_u = spoofed_attack(problem, r.gain_hat);
    report["K_u"] = io::matrix_to_json(K_u);
    report["deceived_closed_loop_spectrum"] =
        spectrum_json(plant.A + plant.B_u * r.gain_hat + plant.B_a * K_u);

    const Vector x0 = energy_x0(cfg, plant.n());
    const double e_dec = closed_loop_energy(plant.A + plant.B_a * K_u, x0);
    const double e_nom =
        nominal ? closed_loop_energy(plant.A + plant.B_a * nominal->K_star, x0)
                : std::numeric_limits<double>::infinity();
    report["energy"] = {{"x0", io::vector_to_json(x0)},
                        {"nominal", io::number(e_nom)},
                        {"deceived", io::number(e_dec)}};
    std::string label = "value";
    if (cfg.doc.contains("energy") && cfg.doc.at("energy").contains("label")) {
      label = cfg.doc.at("energy").at("label").get<std::string>();
    }
    io::write_text_file(cfg.out_dir / "energy.csv",
                        io::energy_table_csv({label}, {e_nom}, {e_dec}));
    if (nominal) {
      io::write_text_file(cfg.out_dir / "suppression.csv",
                          io::suppression_csv(suppression_ratios(K_u, nominal->K_star)));
    }
    return status_exit_code(r.status);
  });
}

int cmd_simulate_learner(const RunConfig& cfg) {
  return run_command(cfg, "simulate-learner", [&](Json& report) -> int {
    const DeceptionProblem problem = cfg.problem();
    const Plant& plant = problem.plant;
    auto [gain, code] = deception_gain(cfg, "simulation", problem, report);
    if (code != kExitOk) return code;
    report["Lambda"] = io::matrix_to_json(gain);
    report["K_u_predicted"] = io::matrix_to_json(spoofed_attack(problem, gain));

    const Json empty = Json::object();
    const Json& sec = cfg.doc.contains("simulation") ? cfg.doc.at("simulation") : empty;
    const Matrix K0 = sec.contains("K0") ? io::matrix_from_json(sec.at("K0"), "simulation.K0")
                                         : Matrix::Zero(plant.m_a(), plant.n());
    DataDrivenOptions dd;
    if (sec.contains("interval")) dd.interval = sec.at("interval").get<double>();
    const TrajectorySpec spec = cfg.trajectory();

    struct Run {
      std::string name;
      std::function<LearnerTrace()> run;
    };
    const std::vector<Run> runs = {
        {"model", [&] { return kleinman_pi_max(plant, gain, problem.objective, K0); }},
        {"data_unknown",
         [&] {
           DataDrivenOptions o = dd;
           o.information = LearnerInformation::kUnknownDynamics;
           return datadriven_pi(plant, gain, problem.objective, spec, K0, o);
         }},
        {"data_known_input",
         [&] {
           DataDrivenOptions o = dd;
           o.information = LearnerInformation::kKnownInputMatrix;
           return datadriven_pi(plant, gain, problem.objective, spec, K0, o);
         }},
    };

    int worst = kExitOk;
    Json learners = Json::object();
    for (const auto& run : runs) {
      try {
        const LearnerTrace t = run.run();
        io::write_text_file(cfg.out_dir / ("learner_" + run.name + ".csv"), io::learner_csv(t));
        learners[run.name] = {{"status", to_string(t.status)},
                              {"iterations", t.iterations.size()},
                              {"final_gain", io::matrix_to_json(t.final_gain())},
                              {"final_distance", io::number(t.iterations.back().distance)}};
        if (t.status != LearnerStatus::kConverged) worst = kExitNumerical;
      } catch (const Error& e) {
        learners[run.name] = {{"status", std::string(to_string(e.kind()))},
                              {"message", e.what()}};
        worst = std::max(worst, exit_code_for(e.kind()));
      }
    }
    report["learners"] = std::move(learners);
    return worst;
  });
}

int cmd_dual(const RunConfig& cfg) {
  return run_command(cfg, "dual", [&](Json& report) -> int {
    const DualProblem d = cfg.dual();
    report["range_condition"] = range_condition(d.plant.B_a, d.plant.B_u);
    const ControllerGain nominal = nominal_controller(d);
    report["N_star"] = io::matrix_to_json(nominal.N);
    report["Z"] = io::matrix_to_json(nominal.Z);
    const DeceptionResult r = dual_bsor_solve(d, cfg.solver());
    report["result"] = result_json(r, emit_matrices(cfg));
    report["status"] = to_string(r.status);
    io::write_text_file(cfg.out_dir / "trace.csv", io::trace_csv(r));
    if (r.gain_hat.size() > 0 && r.status != BsorStatus::kInfeasibleStart) {
      const ControllerGain learned = poisoned_controller(d, r.gain_hat);
      report["N_a"] = io::matrix_to_json(learned.N);
      report["energy"] = {
          {"nominal", io::number(closed_loop_energy(d.plant.A + d.plant.B_u * nominal.N,
                                                    energy_x0(cfg, d.plant.n())))},
          {"poisoned", io::number(closed_loop_energy(d.plant.A + d.plant.B_u * learned.N,
                                                     energy_x0(cfg, d.plant.n())))}};
    }
    return status_exit_code(r.status);
  });
}

int cmd_robustness(const RunConfig& cfg) {
  return run_command(cfg, "robustness", [&](Json& report) -> int {
    const DeceptionProblem problem = cfg.problem();
    const MismatchSpec mismatch = cfg.mismatch();
    mismatch.validate(problem);
    auto [gain, code] = deception_gain(cfg, "mismatch", problem, report);
    if (code != kExitOk) return code;
    const RobustnessReport rr =
        robustness_report(problem, mismatch, gain, cfg.mismatch_epsilon());
    report["Lambda"] = io::matrix_to_json(gain);
    report["J_tilde"] = io::number(rr.J_tilde);
    report["J_hat"] = io::number(rr.J_hat);
    report["gap"] = io::number(rr.gap);
    report["ordering_holds"] = rr.ordering_holds;
    report["epsilon"] = io::number(rr.epsilon);
    report["bound_status"] = to_string(rr.status);
    report["K_u"] = io::matrix_to_json(rr.K_u);
    report["K_hat_u"] = io::matrix_to_json(rr.K_hat_u);
    // Ratios against the attack the mismatched adversary would use unspoofed.
    try {
      const NominalAttack hat = nominal_attack(problem.plant, {mismatch.Q_hat, mismatch.R_hat});
      io::write_text_file(cfg.out_dir / "suppression.csv",
                          io::suppression_csv(suppression_ratios(rr.K_hat_u, hat.K_star)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoStabilizingSolution) throw;
      report["suppression"] = "n/a";
    }
    return kExitOk;
  });
}

int cmd_energy(const RunConfig& cfg) {
  return run_command(cfg, "energy", [&](Json& report) -> int {
    if (!cfg.doc.contains("energy") || !cfg.doc.at("energy").contains("cases") ||
        !cfg.doc.at("energy").at("cases").is_array()) {
      throw Error(ErrorKind::InvalidInput, "energy.cases must be an array");
    }
    const Json& sec = cfg.doc.at("energy");
    std::optional<Vector> shared_x0;
    if (sec.contains("x0")) shared_x0 = io::vector_from_json(sec.at("x0"), "energy.x0");
    auto x0_for = [&](const Json& c, Eigen::Index n) {
      Vector x0 = c.contains("x0") ? io::vector_from_json(c.at("x0"), "energy case x0")
                                   : shared_x0.value_or(Vector::Ones(n));
      if (x0.size() != n) throw Error(ErrorKind::ShapeMismatch, "x0 length differs from A_cl");
      return x0;
    };

    std::vector<std::string> labels;
    std::vector<double> nominal, deceived;
    Json cases = Json::array();
    bool paired = false, single = false;
    std::string single_csv = "case,energy\n";
    int index = 0;
    for (const Json& c : sec.at("cases")) {
      ++index;
      const std::string label =
          c.contains("label") ? c.at("label").get<std::string>() : "case " + std::to_string(index);
      if (c.contains("nominal") && c.contains("deceived")) {
        paired = true;
        const Matrix An = io::matrix_from_json(c.at("nominal"), label + ".nominal");
        const Matrix Ad = io::matrix_from_json(c.at("deceived"), label + ".deceived");
        const Vector x0 = x0_for(c, An.rows());
        labels.push_back(label);
        nominal.push_back(closed_loop_energy(An, x0));
        deceived.push_back(closed_loop_energy(Ad, x0));
        cases.push_back({{"label", label},
                         {"nominal", io::number(nominal.back())},
                         {"deceived", io::number(deceived.back())}});
      } else {
        single = true;
        if (!c.contains("A_cl")) throw Error(ErrorKind::InvalidInput, label + " needs A_cl");
        const Matrix A = io::matrix_from_json(c.at("A_cl"), label + ".A_cl");
        const double e = closed_loop_energy(A, x0_for(c, A.rows()));
        single_csv += label + "," + io::format_double(e) + "\n";
        cases.push_back({{"label", label}, {"energy", io::number(e)}});
      }
    }
    if (paired && single) {
      throw Error(ErrorKind::InvalidInput,
                  "energy cases must all be single A_cl or all nominal/deceived pairs");
    }
    report["cases"] = std::move(cases);
    io::write_text_file(cfg.out_dir / "energy.csv",
                        paired ? io::energy_table_csv(labels, nominal, deceived) : single_csv);
    return kExitOk;
  });
}

int cmd_generate(const RunConfig& cfg) {
  return run_command(cfg, "generate", [&](Json& report) -> int {
    if (!cfg.doc.contains("generate")) {
      throw Error(ErrorKind::InvalidInput, "config is missing the \"generate\" section");
    }
    const Json& g = cfg.doc.at("generate");
    auto dim = [&](const char* key, std::int64_t fallback) -> Eigen::Index {
      if (!g.contains(key)) return fallback;
      if (!g.at(key).is_number_integer()) {
        throw Error(ErrorKind::InvalidInput, std::string(key) + " must be an integer");
      }
      return g.at(key).get<std::int64_t>();
    };
    const Eigen::Index n = dim("n", 0);
    const Eigen::Index m_u = dim("m_u", 1);
    const Eigen::Index m_a = dim("m_a", 1);
    const bool range_mode = g.contains("range_mode") && g.at("range_mode").get<bool>();
    const double r_weight = g.contains("R_scale") ? g.at("R_scale").get<double>() : 1.0;
    const double gamma = g.contains("gamma") ? g.at("gamma").get<double>() : 1e-3;
    const Plant p = generate_plant(n, m_u, m_a, cfg.seed(), range_mode);

    Json instance = {
        {"schema_version", kSchemaVersion},
        {"seed", cfg.seed()},
        {"plant",
         {{"A", io::matrix_to_json(p.A)},
          {"B_u", io::matrix_to_json(p.B_u)},
          {"B_a", io::matrix_to_json(p.B_a)}}},
        {"objective",
         {{"Q", io::matrix_to_json(Matrix::Identity(n, n))},
          {"R", io::matrix_to_json(r_weight * Matrix::Identity(m_a, m_a))}}},
        {"deception",
         {{"K_bar", io::matrix_to_json(Matrix::Zero(m_a, n))}, {"gamma", gamma}}},
        {"dual",
         {{"M", io::matrix_to_json(Matrix::Identity(m_u, m_u))},
          {"N_bar", io::matrix_to_json(Matrix::Zero(m_u, n))},
          {"gamma", gamma}}}};
    io::write_json_file(cfg.out_dir / "instance.json", instance);
    report["instance"] = "instance.json";
    report["spectral_abscissa"] = io::number(spectral_abscissa(p.A));
    report["range_condition"] = range_condition(p.B_a, p.B_u);
    return kExitOk;
  });
}

}  // namespace lqdeceive::cli
