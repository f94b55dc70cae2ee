#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "lqdeceive/cli.hpp"

namespace cli = lqdeceive::cli;

int main(int argc, char** argv) {
  CLI::App app{"Deception gains against data-driven LQ adversaries"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  cli::Overrides ov;
  std::uint64_t seed = 0;
  double omega = 0.0, tol = 0.0;
  int max_iter = 0;
  std::string init;

  using Command = int (*)(const cli::RunConfig&);
  const std::map<std::string, Command> commands = {
      {"solve-attack", cli::cmd_solve_attack},
      {"design-deception", cli::cmd_design_deception},
      {"simulate-learner", cli::cmd_simulate_learner},
      {"dual", cli::cmd_dual},
      {"robustness", cli::cmd_robustness},
      {"energy", cli::cmd_energy},
      {"generate", cli::cmd_generate},
  };
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Config JSON")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--omega", omega, "Relaxation factor")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "Stopping tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--init", init, "zero | deep:SIGMA");
    sub->add_flag("--timing", ov.timing, "Record wall-clock time in the report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--omega")) ov.omega = omega;
  if (sub->count("--tol")) ov.tol = tol;
  if (sub->count("--max-iter")) ov.max_iter = max_iter;
  if (sub->count("--init")) ov.init = init;

  try {
    const cli::RunConfig cfg =
        cli::make_config(lqdeceive::io::read_json_file(config_path), ov, out_dir);
    return commands.at(sub->get_name())(cfg);
  } catch (const lqdeceive::Error& e) {
    std::cerr << e.what() << "\n";
    return cli::exit_code_for(e.kind());
  }
}
