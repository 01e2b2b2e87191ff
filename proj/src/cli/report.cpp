#include "swocp/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace swocp::cli {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0 into 0
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const auto n = trajectory.states.cols();
  const auto m = trajectory.controls_u0.cols();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
  for (Eigen::Index j = 0; j < m; ++j) out << ",u0_" << j + 1;
  for (Eigen::Index j = 0; j < m; ++j) out << ",u1_" << j + 1;
  out << ",vbar\n";
  for (int k = 0; k < trajectory.num_nodes(); ++k) {
    out << format_number(trajectory.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_number(trajectory.states(k, i));
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_number(trajectory.controls_u0(k, j));
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_number(trajectory.controls_u1(k, j));
    out << ',' << format_number(trajectory.mode_signal[k]) << '\n';
  }
}

void write_modes_csv(std::ostream& out, const ModeSequence& modes) {
  out << "initial_mode,switch_times\n" << modes.initial_mode << ',';
  for (std::size_t i = 0; i < modes.switch_times.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_number(modes.switch_times[i]);
  }
  out << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "beta,objective,rollout_cost_switched,num_switches,min_dwell,max_boundary_violation,"
         "status\n";
  for (const SweepRecord& r : records) {
    out << format_number(r.beta) << ',' << format_number(r.objective) << ','
        << format_number(r.rollout_cost_switched) << ',' << r.num_switches << ','
        << format_number(r.min_dwell) << ',' << format_number(r.max_boundary_violation) << ','
        << to_string(r.solve_status) << '\n';
  }
}

void write_summary(std::ostream& out, const std::string& problem, const PipelineResult& run) {
  const bool partial = run.solve.status != SolveStatus::kConverged;
  out << "problem=" << problem << '\n'
      << "beta=" << format_number(run.beta) << '\n'
      << "scheme=" << to_string(run.mesh.scheme) << '\n'
      << "intervals=" << run.mesh.num_intervals() << '\n'
      << "status=" << to_string(run.solve.status) << '\n'
      << "partial=" << (partial ? "true" : "false") << '\n'
      << "objective=" << format_number(run.solve.objective_value) << '\n'
      << "constraint_violation=" << format_number(run.solve.constraint_violation) << '\n'
      << "classification=" << (run.solution_class.singular ? "singular" : "regular") << '\n'
      << "singular_measure=" << format_number(run.solution_class.singular_measure) << '\n'
      << "rollout_cost_switched=" << format_number(run.rollout.switched_cost) << '\n'
      << "num_switches=" << run.modes.num_switches() << '\n'
      << "min_dwell=" << format_number(run.modes.min_dwell()) << '\n'
      << "boundary_violation=" << format_number(run.rollout.boundary_violation) << '\n';
  if (!run.solve.message.empty()) out << "message=" << run.solve.message << '\n';
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string coord(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buffer;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!std::isfinite(x_min)) {
    x_min = y_min = 0.0;
    x_max = y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\""
      << coord(plot_w) << "\" height=\"" << coord(plot_h)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x_min + (x_max - x_min) * i / kTicks;
    const double yv = y_min + (y_max - y_min) * i / kTicks;
    svg << "<line x1=\"" << coord(px(xv)) << "\" y1=\"" << coord(kTop + plot_h) << "\" x2=\""
        << coord(px(xv)) << "\" y2=\"" << coord(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << coord(px(xv)) << "\" y=\"" << coord(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    svg << "<line x1=\"" << coord(kLeft - 5) << "\" y1=\"" << coord(py(yv)) << "\" x2=\""
        << coord(kLeft) << "\" y2=\"" << coord(py(yv)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"" << coord(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << coord(kTop + plot_h / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << coord(kTop + plot_h / 2)
      << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* colour = kColours[k % (sizeof kColours / sizeof kColours[0])];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!first) svg << ' ';
      svg << coord(px(s.x[i])) << ',' << coord(py(s.y[i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    svg << "<line x1=\"" << coord(kLeft + plot_w + 12) << "\" y1=\"" << coord(ly) << "\" x2=\""
        << coord(kLeft + plot_w + 32) << "\" y2=\"" << coord(ly) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << coord(kLeft + plot_w + 38) << "\" y=\"" << coord(ly + 4) << "\">"
        << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace swocp::cli
