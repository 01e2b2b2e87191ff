#include "swocp/mode_sequence.hpp"

#include <algorithm>
#include <stdexcept>

namespace swocp {

int ModeSequence::mode_at(double t) const {
  const auto passed = std::upper_bound(switch_times.begin(), switch_times.end(), t) -
                      switch_times.begin();
  return (passed % 2 == 0) ? initial_mode : 1 - initial_mode;
}

double ModeSequence::min_dwell() const {
  double best = tf - t0;
  for (std::size_t i = 1; i < switch_times.size(); ++i) {
    best = std::min(best, switch_times[i] - switch_times[i - 1]);
  }
  return best;
}

void ModeSequence::validate() const {
  if (initial_mode != 0 && initial_mode != 1) {
    throw std::invalid_argument("mode sequence: initial mode must be 0 or 1");
  }
  if (tf < t0) throw std::invalid_argument("mode sequence: tf before t0");
  for (std::size_t i = 0; i < switch_times.size(); ++i) {
    if (switch_times[i] < t0 || switch_times[i] > tf) {
      throw std::invalid_argument("mode sequence: switch outside horizon");
    }
    if (i > 0 && switch_times[i] <= switch_times[i - 1]) {
      throw std::invalid_argument("mode sequence: switch times not strictly increasing");
    }
  }
}

DwellReport check_dwell(const ModeSequence& sequence, double dwell_time) {
  DwellReport report;
  const auto& s = sequence.switch_times;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] - s[i - 1] < dwell_time) report.violations.emplace_back(s[i - 1], s[i]);
  }
  report.satisfied = report.violations.empty();
  return report;
}

}  // namespace swocp
