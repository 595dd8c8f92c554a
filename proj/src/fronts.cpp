#include "frontlab/fronts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

constexpr std::size_t kMinFitPoints = 10;

SpeedEstimate fit_line(const FrontTrace& trace, double t_lo, double t_hi) {
  std::vector<TracePoint> window;
  for (const auto& p : trace.points) {
    if (p.time >= t_lo && p.time <= t_hi) window.push_back(p);
  }
  if (window.size() < kMinFitPoints) {
    std::ostringstream msg;
    msg << "speed fit for component " << trace.component + 1 << " (" << to_string(trace.side)
        << ") has " << window.size() << " points in [" << t_lo << ", " << t_hi
        << "], needs " << kMinFitPoints;
    throw Error(ErrorKind::InsufficientData, msg.str());
  }
  const auto count = static_cast<double>(window.size());
  double mean_t = 0.0, mean_x = 0.0;
  for (const auto& p : window) {
    mean_t += p.time;
    mean_x += p.position;
  }
  mean_t /= count;
  mean_x /= count;
  double stt = 0.0, stx = 0.0;
  for (const auto& p : window) {
    stt += (p.time - mean_t) * (p.time - mean_t);
    stx += (p.time - mean_t) * (p.position - mean_x);
  }
  if (!(stt > 0.0)) {
    throw Error(ErrorKind::InsufficientData, "speed fit window has a single distinct time");
  }
  SpeedEstimate est;
  est.component = trace.component;
  est.side = trace.side;
  est.theta = trace.theta;
  est.speed = stx / stt;
  est.intercept = mean_x - est.speed * mean_t;
  double ss = 0.0;
  for (const auto& p : window) {
    const double r = p.position - (est.intercept + est.speed * p.time);
    ss += r * r;
  }
  est.rms_residual = std::sqrt(ss / count);
  est.t_lo = window.front().time;
  est.t_hi = window.back().time;
  est.points = window.size();
  return est;
}

}  // namespace

std::string to_string(Side side) { return side == Side::Right ? "right" : "left"; }

double front_position(std::span<const double> profile, const Grid& grid, double theta, Side side) {
  const std::size_t n = profile.size();
  if (n != grid.n) throw Error(ErrorKind::InvalidParam, "profile length differs from grid size");
  auto crossing = [&](std::size_t inner, std::size_t outer) {
    // profile[inner] >= theta > profile[outer]
    const double t = (profile[inner] - theta) / (profile[inner] - profile[outer]);
    return grid.x(inner) + t * (grid.x(outer) - grid.x(inner));
  };
  if (side == Side::Right) {
    for (std::size_t i = n - 1; i > 0; --i) {
      if (profile[i - 1] >= theta && profile[i] < theta) return crossing(i - 1, i);
    }
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (profile[i + 1] >= theta && profile[i] < theta) return crossing(i + 1, i);
    }
  }
  std::ostringstream msg;
  msg << "no " << to_string(side) << " crossing of level " << theta;
  throw Error(ErrorKind::NoCrossing, msg.str());
}

SpeedEstimate estimate_speed(const FrontTrace& trace, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidParam, "window_fraction must lie in (0, 1]");
  }
  if (trace.points.size() < kMinFitPoints) {
    std::ostringstream msg;
    msg << "trace has " << trace.points.size() << " points, needs " << kMinFitPoints;
    throw Error(ErrorKind::InsufficientData, msg.str());
  }
  const double t0 = trace.points.front().time;
  const double t1 = trace.points.back().time;
  return fit_line(trace, t1 - window_fraction * (t1 - t0), t1);
}

SpeedEstimate estimate_speed(const FrontTrace& trace, double t_lo, double t_hi) {
  if (!(t_hi > t_lo)) throw Error(ErrorKind::InvalidParam, "fit window needs t_hi > t_lo");
  return fit_line(trace, t_lo, t_hi);
}

UniformSpeedVerdict uniform_speed_verdict(const std::vector<SpeedEstimate>& estimates,
                                          double predicted, double rtol) {
  if (estimates.empty()) throw Error(ErrorKind::InsufficientData, "no speed estimates to compare");
  if (!(predicted > 0.0)) throw Error(ErrorKind::InvalidParam, "predicted speed must be positive");
  UniformSpeedVerdict verdict;
  verdict.predicted = predicted;
  verdict.per_component = estimates;
  verdict.rtol = rtol;
  for (std::size_t a = 0; a < estimates.size(); ++a) {
    const double sa = std::abs(estimates[a].speed);
    verdict.max_rel_dev_from_predicted =
        std::max(verdict.max_rel_dev_from_predicted, std::abs(sa - predicted) / predicted);
    for (std::size_t b = a + 1; b < estimates.size(); ++b) {
      const double sb = std::abs(estimates[b].speed);
      const double mean = 0.5 * (sa + sb);
      if (mean > 0.0) {
        verdict.max_pairwise_rel_dev = std::max(verdict.max_pairwise_rel_dev, std::abs(sa - sb) / mean);
      }
    }
  }
  verdict.uniform = verdict.max_pairwise_rel_dev <= rtol && verdict.max_rel_dev_from_predicted <= rtol;
  return verdict;
}

}  // namespace frontlab
