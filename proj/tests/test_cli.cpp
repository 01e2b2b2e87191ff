#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "swocp/cli/commands.hpp"
#include "swocp/cli/config.hpp"
#include "swocp/cli/report.hpp"

namespace swocp::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("swocp_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

RunConfig quick_double_integrator(const fs::path& out) {
  RunConfig c;
  c.problem = "double-integrator";
  c.mesh_intervals = 60;
  c.output_dir = out.string();
  return c;
}

int run_tool(const std::string& args) {
  const std::string command = std::string(SWOCP_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(23.0 / 30.0), "0.766666666667");
  EXPECT_EQ(format_number(4.7312), "4.7312");
  EXPECT_EQ(format_number(1.0 / 3.0 * 1e-7), "3.33333333333e-08");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-1.0 / 0.0), "-inf");
}

TEST(Config, ParsesFullDocument) {
  const RunConfig c = parse_config(R"({
    "problem": {"name": "two-tank", "parameters": {"alpha": 3, "x0": [2, 2.5]}},
    "betas": [0, 0.01, 0.2],
    "mesh": {"intervals": 150, "scheme": "hermite-simpson"},
    "solver": {"max_outer_iters": 12, "constraint_tol": 1e-7, "seed": 4, "inner_method": "lbfgs"},
    "analysis": {"delta": 0.1, "threshold": 0.4, "rollout_steps_per_unit_time": 500},
    "output": {"directory": "figs", "csv": true, "svg": false, "parallel_sweep": false}
  })");
  EXPECT_EQ(c.problem, "two-tank");
  EXPECT_EQ(c.parameters.at("alpha"), std::vector<double>{3.0});
  EXPECT_EQ(c.parameters.at("x0"), (std::vector<double>{2.0, 2.5}));
  EXPECT_EQ(c.betas, (std::vector<double>{0.0, 0.01, 0.2}));
  EXPECT_EQ(c.mesh_intervals, 150);
  EXPECT_EQ(c.scheme, Scheme::kHermiteSimpson);
  EXPECT_EQ(c.solver.max_outer_iters, 12);
  EXPECT_EQ(c.solver.constraint_tol, 1e-7);
  EXPECT_EQ(c.solver.seed, 4u);
  EXPECT_EQ(c.solver.inner_method, InnerMethod::kLbfgs);
  EXPECT_EQ(c.analysis.delta, 0.1);
  EXPECT_EQ(c.analysis.rollout_steps_per_unit_time, 500);
  EXPECT_EQ(c.output_dir, "figs");
  EXPECT_FALSE(c.emit_svg);
  EXPECT_FALSE(c.parallel_sweep);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  EXPECT_THROW(parse_config(R"({"bta": 0.1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mesh": {"n": 10}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"solver": {"tolerance": 1e-6}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"output": {"png": true}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": {"label": "x"}})"), ConfigError);
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"beta": 0.1, "betas": [0.2]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"betas": []})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mesh": {"intervals": 10.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mesh": {"scheme": "euler"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"output": {"svg": "yes"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"solver": {"inner_method": "bfgs"}})"), ConfigError);
  EXPECT_THROW(load_config_file("/nonexistent/config.json"), ConfigError);
}

TEST(Config, ValidationCatchesBadRuns) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  c.betas = {-0.1};
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.problem = "pendulum";
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.parameters = {{"gamma", {1.0}}};
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.mesh_intervals = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.analysis.delta = 0.5;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, FlagsOverrideFileValues) {
  RunConfig c = parse_config(R"({"beta": 0.3, "mesh": {"intervals": 40}, "output": {"svg": true}})");
  FlagOverrides flags;
  flags.betas = "0, 0.1,0.2";
  flags.mesh_intervals = 80;
  flags.scheme = "hermite-simpson";
  flags.output_dir = "elsewhere";
  flags.no_svg = true;
  flags.seed = 9;
  apply_overrides(c, flags);
  EXPECT_EQ(c.betas, (std::vector<double>{0.0, 0.1, 0.2}));
  EXPECT_EQ(c.mesh_intervals, 80);
  EXPECT_EQ(c.scheme, Scheme::kHermiteSimpson);
  EXPECT_EQ(c.output_dir, "elsewhere");
  EXPECT_FALSE(c.emit_svg);
  EXPECT_EQ(c.solver.seed, 9u);

  FlagOverrides both;
  both.beta = 0.1;
  both.betas = "0.1";
  EXPECT_THROW(apply_overrides(c, both), ConfigError);
}

TEST(Config, BetaListParsing) {
  EXPECT_EQ(parse_beta_list("0,0.05,1e-1"), (std::vector<double>{0.0, 0.05, 0.1}));
  EXPECT_THROW(parse_beta_list(""), ConfigError);
  EXPECT_THROW(parse_beta_list("0,,1"), ConfigError);
  EXPECT_THROW(parse_beta_list("0.1x"), ConfigError);
}

TEST(Report, CsvHeaders) {
  Trajectory tr;
  tr.times = {0.0, 1.0};
  tr.states = Matrix::Zero(2, 2);
  tr.controls_u0 = Matrix::Zero(2, 1);
  tr.controls_u1 = Matrix::Zero(2, 1);
  tr.mode_signal = Vector::Zero(2);
  std::ostringstream traj, modes, sweep;
  write_trajectory_csv(traj, tr);
  write_modes_csv(modes, ModeSequence{1, {0.25, 0.5}, 0.0, 1.0});
  write_sweep_csv(sweep, {SweepRecord{}});
  EXPECT_EQ(first_line(traj.str()), "t,x1,x2,u0_1,u1_1,vbar");
  EXPECT_EQ(modes.str(), "initial_mode,switch_times\n1,0.25 0.5\n");
  EXPECT_EQ(first_line(sweep.str()),
            "beta,objective,rollout_cost_switched,num_switches,min_dwell,"
            "max_boundary_violation,status");
}

TEST(Report, SvgIsSelfContained) {
  const std::string svg =
      line_chart_svg("a < b", "t", "x", {Series{"s", {0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}}});
  EXPECT_EQ(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("a &lt; b"), std::string::npos);
  EXPECT_EQ(svg.find("href"), std::string::npos);
}

TEST(Commands, SolveWritesAllOutputsAndSummary) {
  const fs::path dir = scratch_dir("solve");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_solve(quick_double_integrator(dir), out, err), kExitOk) << err.str();
  for (const char* f : {"trajectory.csv", "modes.csv", "summary.txt", "states.svg", "mode_signal.svg"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(first_line(slurp(dir / "trajectory.csv")), "t,x1,x2,vbar");
  const std::string summary = slurp(dir / "summary.txt");
  for (const char* key : {"objective=", "rollout_cost_switched=", "num_switches=", "min_dwell=",
                          "boundary_violation=", "partial="}) {
    EXPECT_NE(summary.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(out.str(), summary);
}

TEST(Commands, RerunIsByteIdentical) {
  const fs::path a = scratch_dir("rerun_a");
  const fs::path b = scratch_dir("rerun_b");
  std::ostringstream out, err;
  RunConfig ca = quick_double_integrator(a);
  ca.betas = {0.1};
  RunConfig cb = ca;
  cb.output_dir = b.string();
  ASSERT_EQ(cmd_solve(ca, out, err), kExitOk);
  ASSERT_EQ(cmd_solve(cb, out, err), kExitOk);
  for (const char* f : {"trajectory.csv", "modes.csv", "summary.txt", "states.svg"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Commands, SingleBetaSweepMatchesSolve) {
  const fs::path solo = scratch_dir("single_solve");
  const fs::path swept = scratch_dir("single_sweep");
  std::ostringstream out, err;
  RunConfig c = quick_double_integrator(solo);
  c.betas = {0.2};
  ASSERT_EQ(cmd_solve(c, out, err), kExitOk);
  c.output_dir = swept.string();
  ASSERT_EQ(cmd_sweep(c, out, err), kExitOk);
  for (const char* f : {"trajectory.csv", "modes.csv", "summary.txt"}) {
    EXPECT_EQ(slurp(solo / f), slurp(swept / f)) << f;
  }
  EXPECT_TRUE(fs::exists(swept / "sweep.csv"));
  EXPECT_TRUE(fs::exists(swept / "objective_vs_beta.svg"));
}

TEST(Commands, SweepWritesOneRowPerBetaInOrder) {
  const fs::path dir = scratch_dir("sweep");
  std::ostringstream out, err;
  RunConfig c = quick_double_integrator(dir);
  c.betas = {0.3, 0.0, 0.1};
  c.emit_svg = false;
  ASSERT_EQ(cmd_sweep(c, out, err), kExitOk);
  std::istringstream rows(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(rows, line);
  for (const char* beta : {"0.3,", "0,", "0.1,"}) {
    ASSERT_TRUE(std::getline(rows, line));
    EXPECT_EQ(line.rfind(beta, 0), 0u) << line;
  }
  EXPECT_TRUE(fs::exists(dir / "beta_0.3" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "beta_0" / "modes.csv"));
}

TEST(Commands, SweepWithoutBetasIsConfigError) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(quick_double_integrator(scratch_dir("empty")), out, err), kExitConfig);
}

TEST(Commands, DefaultCheckPassesAndReportsFlatCurvature) {
  std::ostringstream out, err;
  RunConfig c;
  EXPECT_EQ(cmd_check(c, out, err), kExitOk) << out.str() << err.str();
  EXPECT_NE(out.str().find("flat"), std::string::npos);
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

TEST(Commands, AuditsPassForBothProblemsWithPenalty) {
  for (const char* name : {"two-tank", "double-integrator"}) {
    for (Scheme scheme : {Scheme::kTrapezoidal, Scheme::kHermiteSimpson}) {
      RunConfig c;
      c.problem = name;
      c.betas = {0.2};
      c.scheme = scheme;
      for (const AuditResult& r : run_audits(c)) EXPECT_TRUE(r.passed) << name << ": " << r.name << " " << r.detail;
    }
  }
}

TEST(Commands, CorruptedGradientFailsCheck) {
  std::ostringstream out, err;
  RunConfig c;
  c.corrupt_gradient = true;
  EXPECT_EQ(cmd_check(c, out, err), kExitAudit);
  EXPECT_NE(out.str().find("FAIL  objective gradient"), std::string::npos);
}

TEST(Tool, ExitCodes) {
  const fs::path dir = scratch_dir("tool");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_tool("solve --problem double-integrator --mesh-n 40 --no-svg" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
  EXPECT_FALSE(fs::exists(dir / "states.svg"));
  EXPECT_EQ(run_tool("solve --problem pendulum" + out), 1);
  EXPECT_EQ(run_tool("solve --beta 0.1 --betas 0.1,0.2" + out), 1);
  EXPECT_EQ(run_tool("solve --scheme euler" + out), 1);
  EXPECT_EQ(run_tool("sweep --betas ''" + out), 1);
  EXPECT_EQ(run_tool("sweep --problem double-integrator" + out), 1);
  EXPECT_EQ(run_tool("frobnicate"), 1);
  EXPECT_EQ(run_tool("check --problem double-integrator --inject-gradient-fault"), 3);
  EXPECT_EQ(run_tool("check --problem double-integrator --beta 0.05 --seed 3"), 0);

  std::ofstream(dir / "bad.json") << R"({"problem": {"name": "two-tank"}, "colour": "red"})";
  EXPECT_EQ(run_tool("solve --config " + (dir / "bad.json").string()), 1);
  std::ofstream(dir / "good.json")
      << R"({"problem": {"name": "double-integrator"}, "betas": [0, 0.2], "mesh": {"intervals": 40}})";
  EXPECT_EQ(run_tool("sweep --config " + (dir / "good.json").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
}

}  // namespace
}  // namespace swocp::cli
