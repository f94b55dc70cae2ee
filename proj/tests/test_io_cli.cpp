#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lqdeceive/cli.hpp"

namespace lqdeceive {
namespace {

namespace fs = std::filesystem;
using io::Json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lqdeceive_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(LQDECEIVE_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json example_config(double R = 2.0) {
  return {{"schema_version", 1},
          {"seed", 7},
          {"plant", {{"A", {{-1.0}}}, {"B_u", {{1.0}}}, {"B_a", {{1.0}}}}},
          {"objective", {{"Q", {{1.0}}}, {"R", {{R}}}}},
          {"deception", {{"K_bar", {{0.2}}}, {"gamma", 1e-6}}},
          {"solver", {{"omega", 1e-3}, {"tol", 1e-6}, {"init", "deep:100"}}}};
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const fs::path p = dir / "config.json";
  io::write_json_file(p, j);
  return p;
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -4.1, 1e-300, 6.02214076e23, 0.625}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.625), "0.625");
  EXPECT_EQ(io::format_double(INFINITY), "inf");
  EXPECT_EQ(io::format_double(-INFINITY), "-inf");
  EXPECT_EQ(io::format_double(NAN), "nan");
}

TEST(Json, MatrixRoundTrip) {
  Matrix M(2, 3);
  M << 1.5, -2, 1.0 / 3.0, 1e-17, 4, 5;
  const Json j = io::matrix_to_json(M);
  EXPECT_EQ(io::matrix_from_json(Json::parse(j.dump()), "M"), M);
  EXPECT_EQ(io::matrix_from_json(Json::parse("[1, 2, 3]"), "row").rows(), 1);
}

TEST(Json, RejectsMalformedMatrices) {
  for (const char* text : {"[[1, 2], [3]]", "[]", "[[1, \"a\"]]", "3", "[[]]"}) {
    try {
      io::matrix_from_json(Json::parse(text), "M");
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidInput) << text;
    }
  }
}

TEST(Config, OverridesTakePrecedence) {
  cli::Overrides ov;
  ov.omega = 0.25;
  ov.init = "zero";
  ov.seed = 99;
  const cli::RunConfig cfg = cli::make_config(example_config(), ov, ".");
  EXPECT_EQ(cfg.solver().omega, 0.25);
  EXPECT_EQ(cfg.solver().init.kind, InitKind::kZero);
  EXPECT_EQ(cfg.solver().tol, 1e-6);
  EXPECT_EQ(cfg.seed(), 99u);
}

TEST(Config, InitParsing) {
  EXPECT_EQ(cli::parse_init("deep:25").sigma, 25.0);
  EXPECT_EQ(cli::parse_init("zero").kind, InitKind::kZero);
  for (const char* bad : {"deep:", "deep:-1", "deep:abc", "random"}) {
    EXPECT_THROW(cli::parse_init(bad), Error) << bad;
  }
}

TEST(Config, SchemaVersionRequired) {
  Json j = example_config();
  j.erase("schema_version");
  EXPECT_THROW(cli::make_config(j, {}, "."), Error);
  j["schema_version"] = 2;
  EXPECT_THROW(cli::make_config(j, {}, "."), Error);
}

TEST(Config, GammaZeroMapsToFloor) {
  Json j = example_config();
  j["deception"]["gamma"] = 0.0;
  const cli::RunConfig cfg = cli::make_config(j, {}, ".");
  EXPECT_EQ(cfg.problem().Gamma(0, 0), kGammaFloor);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code_for(ErrorKind::InvalidInput), 1);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::ShapeMismatch), 1);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::NoStabilizingSolution), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::OutOfDomain), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::RankDeficientData), 4);
}

TEST(Cli, SolveAttack) {
  const fs::path dir = scratch("solve");
  EXPECT_EQ(run("solve-attack --config " + write_config(dir, example_config()).string() +
                " --out " + (dir / "out").string()),
            0);
  const Json r = io::read_json_file(dir / "out" / "report.json");
  EXPECT_EQ(r["status"], "Ok");
  EXPECT_NEAR(r["K_star"][0][0].get<double>(), 1.0 - std::sqrt(0.5), 1e-12);
}

TEST(Cli, SolveAttackWithoutSolution) {
  const fs::path dir = scratch("nosol");
  EXPECT_EQ(run("solve-attack --config " + write_config(dir, example_config(0.5)).string() +
                " --out " + dir.string()),
            2);
  EXPECT_EQ(io::read_json_file(dir / "report.json")["status"], "NoStabilizingSolution");
}

TEST(Cli, InputErrors) {
  const fs::path dir = scratch("input");
  Json ragged = example_config();
  ragged["plant"]["A"] = Json::parse("[[-1, 0], [1]]");
  EXPECT_EQ(run("solve-attack --config " + write_config(dir, ragged).string() + " --out " +
                dir.string()),
            1);
  const fs::path cfg = write_config(dir, example_config());
  EXPECT_EQ(run("solve-attack --config " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(run("design-deception --config " + cfg.string() + " --init bogus --out " +
                dir.string()),
            1);
  EXPECT_EQ(run("no-such-command --config " + cfg.string()), 1);
  EXPECT_EQ(run("solve-attack"), 1);
  io::write_text_file(dir / "broken.json", "{\"schema_version\": 1,");
  EXPECT_EQ(run("solve-attack --config " + (dir / "broken.json").string()), 1);
}

TEST(Cli, EnergyTable) {
  const fs::path dir = scratch("energy");
  Json j = {{"schema_version", 1},
            {"energy",
             {{"cases",
               {{{"label", "stable"}, {"A_cl", {{-0.8}}}, {"x0", {1.0}}},
                {{"label", "unstable"}, {"A_cl", {{0.2}}}, {"x0", {1.0}}}}}}}};
  EXPECT_EQ(run("energy --config " + write_config(dir, j).string() + " --out " + dir.string()), 0);
  EXPECT_EQ(slurp(dir / "energy.csv"), "case,energy\nstable,0.625\nunstable,inf\n");

  Json paired = {{"schema_version", 1},
                 {"energy",
                  {{"x0", {1.0}},
                   {"cases", {{{"label", "R=2"}, {"nominal", {{-0.8}}}, {"deceived", {{0.1}}}}}}}}};
  EXPECT_EQ(run("energy --config " + write_config(dir, paired).string() + " --out " +
                dir.string()),
            0);
  EXPECT_EQ(slurp(dir / "energy.csv"), "Case,R=2\nNominal,0.625\nDeceived,inf\n");
}

TEST(Cli, DesignDeceptionDeterministic) {
  const fs::path dir = scratch("design");
  const fs::path cfg = write_config(dir, example_config(0.5));
  ASSERT_EQ(run("design-deception --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run("design-deception --config " + cfg.string() + " --out " + (dir / "b").string()), 0);
  EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
  EXPECT_EQ(slurp(dir / "a" / "trace.csv"), slurp(dir / "b" / "trace.csv"));
  const std::string trace = slurp(dir / "a" / "trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "iter,cost,grad_norm,step_norm");
  const Json r = io::read_json_file(dir / "a" / "report.json");
  EXPECT_EQ(r["status"], "Converged");
  EXPECT_NEAR(r["result"]["gain_hat"][0][0].get<double>(), -4.1, 5e-2);
  EXPECT_FALSE(r.contains("wall_clock_seconds"));
}

TEST(Cli, TimingFlagAddsWallClock) {
  const fs::path dir = scratch("timing");
  ASSERT_EQ(run("solve-attack --timing --config " + write_config(dir, example_config()).string() +
                " --out " + dir.string()),
            0);
  EXPECT_TRUE(io::read_json_file(dir / "report.json").contains("wall_clock_seconds"));
}

TEST(Cli, InfeasibleStartExitCode) {
  const fs::path dir = scratch("infeasible");
  EXPECT_EQ(run("design-deception --init zero --config " +
                write_config(dir, example_config(0.5)).string() + " --out " + dir.string()),
            3);
}

TEST(Cli, MaxIterationsExitCode) {
  const fs::path dir = scratch("maxiter");
  EXPECT_EQ(run("design-deception --max-iter 3 --config " +
                write_config(dir, example_config(0.5)).string() + " --out " + dir.string()),
            4);
  EXPECT_EQ(io::read_json_file(dir / "report.json")["status"], "MaxIterations");
}

TEST(Cli, RobustnessIdenticalWeights) {
  const fs::path dir = scratch("robust");
  Json j = example_config(0.5);
  j["deception"]["K_bar"] = {{0.0}};
  j["mismatch"] = {{"Q_hat", {{1.0}}}, {"R_hat", {{0.5}}}, {"Lambda", {{-4.1}}}};
  EXPECT_EQ(run("robustness --config " + write_config(dir, j).string() + " --out " + dir.string()), 0);
  EXPECT_EQ(io::read_json_file(dir / "report.json")["gap"].get<double>(), 0.0);
}

TEST(Cli, SimulateLearnerAndDual) {
  const fs::path dir = scratch("learn");
  Json j = example_config(0.5);
  j["simulation"] = {{"Lambda", {{-4.1}}}, {"x0", {1.0}}};
  j["dual"] = {{"M", {{1.0}}}, {"N_bar", {{0.0}}}, {"gamma", 1e-4}};
  const fs::path cfg = write_config(dir, j);
  EXPECT_EQ(run("simulate-learner --config " + cfg.string() + " --out " + dir.string()), 0);
  const Json r = io::read_json_file(dir / "report.json");
  for (const char* name : {"model", "data_unknown", "data_known_input"}) {
    EXPECT_EQ(r["learners"][name]["status"], "Converged") << name;
    EXPECT_NEAR(r["learners"][name]["final_gain"][0][0].get<double>(), 0.2, 1e-2) << name;
    EXPECT_TRUE(fs::exists(dir / (std::string("learner_") + name + ".csv")));
  }
  EXPECT_EQ(run("dual --init zero --config " + cfg.string() + " --out " + dir.string()), 0);
  EXPECT_EQ(io::read_json_file(dir / "report.json")["status"], "Converged");
}

TEST(Cli, GenerateRoundTrip) {
  const fs::path dir = scratch("generate");
  Json bad = {{"schema_version", 1}, {"generate", {{"n", 0}}}};
  EXPECT_EQ(run("generate --config " + write_config(dir, bad).string() + " --out " + dir.string()), 1);

  Json j = {{"schema_version", 1}, {"generate", {{"n", 4}, {"m_u", 2}, {"m_a", 1}, {"range_mode", true}}}};
  const fs::path cfg = write_config(dir, j);
  ASSERT_EQ(run("generate --seed 11 --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run("generate --seed 11 --config " + cfg.string() + " --out " + (dir / "b").string()), 0);
  EXPECT_EQ(slurp(dir / "a" / "instance.json"), slurp(dir / "b" / "instance.json"));

  const Json inst = io::read_json_file(dir / "a" / "instance.json");
  const cli::RunConfig loaded = cli::make_config(inst, {}, dir);
  const Plant p = loaded.plant();
  EXPECT_LE(spectral_abscissa(p.A), -0.1);
  // Re-serializing the parsed instance reproduces the file.
  Json again = inst;
  again["plant"]["A"] = io::matrix_to_json(p.A);
  EXPECT_EQ(again.dump(2) + "\n", slurp(dir / "a" / "instance.json"));
  EXPECT_EQ(cli::generate_plant(4, 2, 1, 11, true).A, p.A);
  EXPECT_NE(run("solve-attack --config " + (dir / "a" / "instance.json").string() + " --out " +
                (dir / "c").string()),
            1);
}

}  // namespace
}  // namespace lqdeceive
