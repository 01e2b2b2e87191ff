#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "swocp/cli/commands.hpp"

namespace {

struct Flags {
  std::string config_path;
  swocp::cli::FlagOverrides overrides;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
  auto& o = flags.overrides;
  cmd->add_option("--config", flags.config_path, "JSON run configuration");
  cmd->add_option_function<std::string>("--problem", [&o](const std::string& v) { o.problem = v; },
                                        "two-tank | double-integrator");
  auto* beta = cmd->add_option_function<double>("--beta", [&o](double v) { o.beta = v; },
                                                "auxiliary cost weight");
  cmd->add_option_function<std::string>("--betas", [&o](const std::string& v) { o.betas = v; },
                                        "comma-separated weights")
      ->excludes(beta);
  cmd->add_option_function<int>("--mesh-n", [&o](int v) { o.mesh_intervals = v; },
                                "number of mesh intervals");
  cmd->add_option_function<std::string>("--scheme", [&o](const std::string& v) { o.scheme = v; },
                                        "trapezoidal | hermite-simpson");
  cmd->add_option_function<std::string>("--out", [&o](const std::string& v) { o.output_dir = v; },
                                        "output directory");
  cmd->add_flag("--no-svg", o.no_svg, "skip SVG plots");
  cmd->add_option_function<unsigned>("--seed", [&o](unsigned v) { o.seed = v; },
                                     "seed for randomized audits");
  // Test hook: perturbs the analytic gradient seen by the audit.
  cmd->add_flag("--inject-gradient-fault", o.corrupt_gradient)->group("");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched optimal control via embedding and auxiliary switching cost"};
  app.require_subcommand(1);
  Flags solve_flags, sweep_flags, check_flags;
  auto* solve = app.add_subcommand("solve", "solve one problem and write trajectory outputs");
  auto* sweep = app.add_subcommand("sweep", "solve for a list of beta values");
  auto* check = app.add_subcommand("check", "run derivative, curvature and integrator audits");
  add_common_flags(solve, solve_flags);
  add_common_flags(sweep, sweep_flags);
  add_common_flags(check, check_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return swocp::cli::kExitConfig;
  }

  const Flags& flags = solve->parsed() ? solve_flags : sweep->parsed() ? sweep_flags : check_flags;
  swocp::cli::RunConfig config;
  try {
    if (!flags.config_path.empty()) config = swocp::cli::load_config_file(flags.config_path);
    swocp::cli::apply_overrides(config, flags.overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return swocp::cli::kExitConfig;
  }

  if (solve->parsed()) return swocp::cli::cmd_solve(config, std::cout, std::cerr);
  if (sweep->parsed()) return swocp::cli::cmd_sweep(config, std::cout, std::cerr);
  return swocp::cli::cmd_check(config, std::cout, std::cerr);
}
