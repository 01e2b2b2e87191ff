#pragma once

#include <utility>
#include <vector>

namespace swocp {

/// Piecewise-constant binary mode signal on [t0, tf], described by its
/// initial mode and the instants at which it toggles.
struct ModeSequence {
  int initial_mode = 0;
  std::vector<double> switch_times;  // strictly increasing, inside (t0, tf)
  double t0 = 0.0;
  double tf = 0.0;

  int num_switches() const { return static_cast<int>(switch_times.size()); }
  int mode_at(double t) const;

  /// Smallest gap between consecutive switch instants. The leading and
  /// trailing segments are not counted; with fewer than two switches the
  /// horizon length is returned.
  double min_dwell() const;

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct DwellReport {
  bool satisfied = true;
  std::vector<std::pair<double, double>> violations;
};

/// Checks that consecutive switch instants are at least `dwell_time` apart.
DwellReport check_dwell(const ModeSequence& sequence, double dwell_time);

}  // namespace swocp
