#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "frontlab/grid.hpp"

namespace frontlab {

enum class Side { Right, Left };

std::string to_string(Side side);

struct TracePoint {
  double time = 0.0;
  double position = 0.0;
};

/// Positions of the theta level crossing of one component on one side.
struct FrontTrace {
  std::size_t component = 0;
  Side side = Side::Right;
  double theta = 0.0;
  std::vector<TracePoint> points;  // strictly increasing times
};

struct SpeedEstimate {
  std::size_t component = 0;
  Side side = Side::Right;
  double theta = 0.0;
  double speed = 0.0;  // signed: negative for a left front moving outward
  double intercept = 0.0;
  double rms_residual = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
};

struct UniformSpeedVerdict {
  double predicted = 0.0;
  std::vector<SpeedEstimate> per_component;
  double max_pairwise_rel_dev = 0.0;
  double max_rel_dev_from_predicted = 0.0;
  double rtol = 0.0;
  bool uniform = false;
};

/// Outermost crossing of `theta` on the given side, located by linear
/// interpolation between adjacent nodes. Throws Error(NoCrossing).
double front_position(std::span<const double> profile, const Grid& grid, double theta, Side side);

/// Least-squares line through the trace points in the trailing
/// `window_fraction` of its time range. Needs at least 10 points.
SpeedEstimate estimate_speed(const FrontTrace& trace, double window_fraction = 0.5);

/// Same fit restricted to t in [t_lo, t_hi].
SpeedEstimate estimate_speed(const FrontTrace& trace, double t_lo, double t_hi);

/// Compares outward speeds |speed| pairwise (relative to the pair mean) and
/// against the prediction.
UniformSpeedVerdict uniform_speed_verdict(const std::vector<SpeedEstimate>& estimates,
                                          double predicted, double rtol);

}  // namespace frontlab
