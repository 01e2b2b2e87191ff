#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "swocp/analysis.hpp"

namespace swocp::cli {

/// 12 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double value);

/// Header: t,x1..xn,u0_1..u0_m,u1_1..u1_m,vbar
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// Header: initial_mode,switch_times. One data row; switch times are
/// space-separated inside the second field.
void write_modes_csv(std::ostream& out, const ModeSequence& modes);

/// Header: beta,objective,rollout_cost_switched,num_switches,min_dwell,
/// max_boundary_violation,status
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

/// key=value lines describing one pipeline run.
void write_summary(std::ostream& out, const std::string& problem, const PipelineResult& run);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart with axes, ticks and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

}  // namespace swocp::cli
