#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swocp/analysis.hpp"
#include "swocp/problems.hpp"

namespace swocp::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one CLI run needs. See docs/config.md for the file schema.
struct RunConfig {
  std::string problem = "two-tank";
  problems::Parameters parameters;
  /// Empty means "use the problem's nominal weight" for solve; sweep
  /// requires an explicit non-empty list.
  std::vector<double> betas;
  int mesh_intervals = 100;
  Scheme scheme = Scheme::kTrapezoidal;
  SolveOptions solver;
  AnalysisOptions analysis;
  std::string output_dir = "out";
  bool emit_csv = true;
  bool emit_svg = true;
  bool parallel_sweep = true;

  /// Fault injection for the gradient audit; never set by config files.
  bool corrupt_gradient = false;
};

/// Overrides collected from command-line flags; unset fields keep the
/// file (or default) value.
struct FlagOverrides {
  std::optional<std::string> problem;
  std::optional<double> beta;
  std::optional<std::string> betas;  // comma-separated
  std::optional<int> mesh_intervals;
  std::optional<std::string> scheme;
  std::optional<std::string> output_dir;
  bool no_svg = false;
  std::optional<unsigned> seed;
  bool corrupt_gradient = false;
};

/// Parses a JSON document. Unknown keys anywhere are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

void apply_overrides(RunConfig& config, const FlagOverrides& flags);

/// Parses "0,0.1,0.2". Throws ConfigError on malformed or empty lists.
std::vector<double> parse_beta_list(const std::string& text);

/// Checks the whole configuration before any solve; throws ConfigError.
void validate(const RunConfig& config);

}  // namespace swocp::cli
