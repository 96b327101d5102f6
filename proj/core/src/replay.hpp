#pragma once

#include <sstream>

#include "mfswitch/chain.hpp"
#include "mfswitch/dynamics.hpp"
#include "mfswitch/error.hpp"

namespace mfswitch::detail {

// Feeds the dense record up to t into `acc`.
inline void replay(const TrajectoryRecord& traj, const SwitchingPath& path, double t, StepObserver& acc) {
  if (!traj.every_step || traj.snapshots.empty()) {
    throw Error(ErrorKind::CheckpointMissing, "residuals need a trajectory recorded at every substep");
  }
  const Snapshot* end = traj.find(t);
  if (end == nullptr) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << " is not a recorded time";
    throw Error(ErrorKind::TimeNotOnGrid, os.str());
  }
  for (const double j : path.jump_times()) {
    if (j <= t && traj.find(j) == nullptr) {
      std::ostringstream os;
      os.precision(17);
      os << "jump at " << j << " has no snapshot";
      throw Error(ErrorKind::CheckpointMissing, os.str());
    }
  }
  const double tol = 1e-9 * traj.dt;
  double prev = -1.0;
  for (const auto& s : traj.snapshots) {
    if (s.time > end->time) break;
    if (prev >= 0.0 && s.time - prev > traj.dt + tol) {
      throw Error(ErrorKind::CheckpointMissing, "snapshot spacing exceeds dt");
    }
    if (path.value_at(s.time) != s.regime) {
      throw Error(ErrorKind::PathMismatch, "trajectory regimes do not follow the given path");
    }
    const MeasureView view = view_of(s.measure);
    acc.observe(s.time, s.measure, view, s.regime);
    prev = s.time;
  }
}

}  // namespace mfswitch::detail
