#include "swocp/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace swocp::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!object.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : object.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

double get_number(const json& value, const std::string& where) {
  if (!value.is_number()) throw ConfigError(where + ": expected a number");
  return value.get<double>();
}

int get_int(const json& value, const std::string& where) {
  if (!value.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return value.get<int>();
}

bool get_bool(const json& value, const std::string& where) {
  if (!value.is_boolean()) throw ConfigError(where + ": expected true or false");
  return value.get<bool>();
}

std::string get_string(const json& value, const std::string& where) {
  if (!value.is_string()) throw ConfigError(where + ": expected a string");
  return value.get<std::string>();
}

void read_problem(const json& node, RunConfig& config) {
  reject_unknown(node, "problem", {"name", "parameters"});
  if (node.contains("name")) config.problem = get_string(node["name"], "problem.name");
  if (!node.contains("parameters")) return;
  const json& params = node["parameters"];
  if (!params.is_object()) throw ConfigError("problem.parameters: expected an object");
  for (const auto& item : params.items()) {
    const std::string where = "problem.parameters." + item.key();
    std::vector<double> values;
    if (item.value().is_array()) {
      for (const json& v : item.value()) values.push_back(get_number(v, where));
    } else {
      values.push_back(get_number(item.value(), where));
    }
    config.parameters[item.key()] = values;
  }
}

void read_mesh(const json& node, RunConfig& config) {
  reject_unknown(node, "mesh", {"intervals", "scheme"});
  if (node.contains("intervals")) config.mesh_intervals = get_int(node["intervals"], "mesh.intervals");
  if (node.contains("scheme")) {
    try {
      config.scheme = parse_scheme(get_string(node["scheme"], "mesh.scheme"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("mesh.scheme: ") + e.what());
    }
  }
}

void read_solver(const json& node, RunConfig& config) {
  reject_unknown(node, "solver",
                 {"max_outer_iters", "max_inner_iters", "constraint_tol", "optimality_tol",
                  "initial_penalty", "penalty_growth", "seed", "inner_method"});
  SolveOptions& s = config.solver;
  if (node.contains("max_outer_iters")) s.max_outer_iters = get_int(node["max_outer_iters"], "solver.max_outer_iters");
  if (node.contains("max_inner_iters")) s.max_inner_iters = get_int(node["max_inner_iters"], "solver.max_inner_iters");
  if (node.contains("constraint_tol")) s.constraint_tol = get_number(node["constraint_tol"], "solver.constraint_tol");
  if (node.contains("optimality_tol")) s.optimality_tol = get_number(node["optimality_tol"], "solver.optimality_tol");
  if (node.contains("initial_penalty")) s.initial_penalty = get_number(node["initial_penalty"], "solver.initial_penalty");
  if (node.contains("penalty_growth")) s.penalty_growth = get_number(node["penalty_growth"], "solver.penalty_growth");
  if (node.contains("seed")) {
    const int seed = get_int(node["seed"], "solver.seed");
    if (seed < 0) throw ConfigError("solver.seed: must be non-negative");
    s.seed = static_cast<unsigned>(seed);
  }
  if (node.contains("inner_method")) {
    const std::string method = get_string(node["inner_method"], "solver.inner_method");
    if (method == "newton") {
      s.inner_method = InnerMethod::kProjectedNewton;
    } else if (method == "lbfgs") {
      s.inner_method = InnerMethod::kLbfgs;
    } else {
      throw ConfigError("solver.inner_method: expected 'newton' or 'lbfgs'");
    }
  }
}

void read_analysis(const json& node, RunConfig& config) {
  reject_unknown(node, "analysis", {"delta", "threshold", "rollout_steps_per_unit_time"});
  AnalysisOptions& a = config.analysis;
  if (node.contains("delta")) a.delta = get_number(node["delta"], "analysis.delta");
  if (node.contains("threshold")) a.threshold = get_number(node["threshold"], "analysis.threshold");
  if (node.contains("rollout_steps_per_unit_time")) {
    a.rollout_steps_per_unit_time =
        get_int(node["rollout_steps_per_unit_time"], "analysis.rollout_steps_per_unit_time");
  }
}

void read_output(const json& node, RunConfig& config) {
  reject_unknown(node, "output", {"directory", "csv", "svg", "parallel_sweep"});
  if (node.contains("directory")) config.output_dir = get_string(node["directory"], "output.directory");
  if (node.contains("csv")) config.emit_csv = get_bool(node["csv"], "output.csv");
  if (node.contains("svg")) config.emit_svg = get_bool(node["svg"], "output.svg");
  if (node.contains("parallel_sweep")) config.parallel_sweep = get_bool(node["parallel_sweep"], "output.parallel_sweep");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "config", {"problem", "beta", "betas", "mesh", "solver", "analysis", "output"});
  RunConfig config;
  if (doc.contains("problem")) read_problem(doc["problem"], config);
  if (doc.contains("beta") && doc.contains("betas")) {
    throw ConfigError("config: give either 'beta' or 'betas', not both");
  }
  if (doc.contains("beta")) config.betas = {get_number(doc["beta"], "beta")};
  if (doc.contains("betas")) {
    if (!doc["betas"].is_array()) throw ConfigError("betas: expected an array");
    for (const json& v : doc["betas"]) config.betas.push_back(get_number(v, "betas"));
    if (config.betas.empty()) throw ConfigError("betas: list is empty");
  }
  if (doc.contains("mesh")) read_mesh(doc["mesh"], config);
  if (doc.contains("solver")) read_solver(doc["solver"], config);
  if (doc.contains("analysis")) read_analysis(doc["analysis"], config);
  if (doc.contains("output")) read_output(doc["output"], config);
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<double> parse_beta_list(const std::string& text) {
  std::vector<double> betas;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("--betas: empty entry");
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item.substr(first), &used);
    } catch (const std::exception&) {
      throw ConfigError("--betas: cannot parse '" + item + "'");
    }
    if (item.find_first_not_of(" \t", first + used) != std::string::npos) {
      throw ConfigError("--betas: cannot parse '" + item + "'");
    }
    betas.push_back(value);
  }
  if (betas.empty()) throw ConfigError("--betas: list is empty");
  return betas;
}

void apply_overrides(RunConfig& config, const FlagOverrides& flags) {
  if (flags.problem) config.problem = *flags.problem;
  if (flags.beta && flags.betas) throw ConfigError("give either --beta or --betas, not both");
  if (flags.beta) config.betas = {*flags.beta};
  if (flags.betas) config.betas = parse_beta_list(*flags.betas);
  if (flags.mesh_intervals) config.mesh_intervals = *flags.mesh_intervals;
  if (flags.scheme) {
    try {
      config.scheme = parse_scheme(*flags.scheme);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--scheme: ") + e.what());
    }
  }
  if (flags.output_dir) config.output_dir = *flags.output_dir;
  if (flags.no_svg) config.emit_svg = false;
  if (flags.seed) config.solver.seed = *flags.seed;
  if (flags.corrupt_gradient) config.corrupt_gradient = true;
}

void validate(const RunConfig& config) {
  try {
    problems::make(config.problem, config.parameters);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  for (double beta : config.betas) {
    if (!std::isfinite(beta) || beta < 0.0) throw ConfigError("beta values must be finite and >= 0");
  }
  if (config.mesh_intervals < 2) throw ConfigError("mesh.intervals must be at least 2");
  try {
    config.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  const AnalysisOptions& a = config.analysis;
  if (!(a.delta > 0.0 && a.delta < 0.5)) throw ConfigError("analysis.delta must lie in (0, 0.5)");
  if (!(a.threshold > 0.0 && a.threshold < 1.0)) throw ConfigError("analysis.threshold must lie in (0, 1)");
  if (a.rollout_steps_per_unit_time < 1) throw ConfigError("analysis.rollout_steps_per_unit_time must be positive");
  if (config.output_dir.empty()) throw ConfigError("output.directory must not be empty");
}

}  // namespace swocp::cli
