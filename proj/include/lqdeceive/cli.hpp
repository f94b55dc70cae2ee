#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lqdeceive/dual.hpp"
#include "lqdeceive/io.hpp"

namespace lqdeceive::cli {

inline constexpr int kSchemaVersion = 1;

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitNoStabilizingSolution = 2,
  kExitInfeasible = 3,
  kExitNumerical = 4,
};

int exit_code_for(ErrorKind kind);

/// Command-line values that take precedence over the config document.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> omega;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> init;  // "zero" or "deep:SIGMA"
  bool timing = false;
};

/// A parsed config document. Sections are decoded lazily by the commands
/// that need them, so each subcommand only validates what it uses.
struct RunConfig {
  io::Json doc;
  Overrides overrides;
  std::filesystem::path out_dir = ".";

  std::uint64_t seed() const;
  Plant plant(bool require_hurwitz = true) const;
  AdversaryObjective objective() const;
  DeceptionProblem problem() const;
  BsorConfig solver() const;
  MismatchSpec mismatch() const;
  double mismatch_epsilon() const;
  DualProblem dual() const;
  TrajectorySpec trajectory() const;
};

/// Checks schema_version and wraps the document.
RunConfig make_config(io::Json doc, Overrides overrides, std::filesystem::path out_dir);

InitMode parse_init(const std::string& text);

/// Scalar or matrix regularizer; a scalar 0 maps to the floor 1e-12 I.
Matrix parse_regularizer(const io::Json& section, Eigen::Index dim);

// Each command writes report.json (plus its CSVs) into cfg.out_dir and
// returns the process exit code.
int cmd_solve_attack(const RunConfig& cfg);
int cmd_design_deception(const RunConfig& cfg);
int cmd_simulate_learner(const RunConfig& cfg);
int cmd_dual(const RunConfig& cfg);
int cmd_robustness(const RunConfig& cfg);
int cmd_energy(const RunConfig& cfg);
int cmd_generate(const RunConfig& cfg);

/// Seeded random instance: Hurwitz A with alpha(A) <= -0.1, random B_u and
/// B_a (B_a = B_u E when range_mode is set).
Plant generate_plant(Eigen::Index n, Eigen::Index m_u, Eigen::Index m_a,
                     std::uint64_t seed, bool range_mode);

}  // namespace lqdeceive::cli
