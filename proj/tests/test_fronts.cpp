#include <cmath>
#include <vector>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/fronts.hpp"

using namespace frontlab;

namespace {

std::vector<double> plateau_profile(const Grid& grid, double edge) {
  std::vector<double> u(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) u[i] = std::min(1.0, std::exp(-(std::abs(grid.x(i)) - edge)));
  return u;
}

FrontTrace line_trace(double speed, double intercept, double wiggle = 0.0) {
  FrontTrace t;
  for (int i = 0; i <= 200; ++i) {
    const double time = 0.25 * i;
    t.points.push_back({time, intercept + speed * time + wiggle * std::sin(3.0 * time)});
  }
  return t;
}

SpeedEstimate estimate(double speed, std::size_t component = 0, Side side = Side::Right) {
  SpeedEstimate e;
  e.speed = side == Side::Right ? speed : -speed;
  e.component = component;
  e.side = side;
  return e;
}

}  // namespace

TEST_CASE("crossing of an exponential edge") {
  const Grid grid = Grid::make(30.0, 0.1);
  const auto u = plateau_profile(grid, 10.0);
  const double exact = 10.0 + std::log(2.0);
  CHECK(std::abs(front_position(u, grid, 0.5, Side::Right) - exact) <= grid.dx * grid.dx);
  CHECK(std::abs(front_position(u, grid, 0.5, Side::Left) + exact) <= grid.dx * grid.dx);
}

TEST_CASE("outermost crossing is used") {
  const Grid grid = Grid::make(10.0, 1.0);
  std::vector<double> u(grid.n, 0.0);
  u[grid.center()] = 1.0;
  u[grid.center() + 5] = 1.0;  // isolated bump at x = 5
  CHECK(front_position(u, grid, 0.5, Side::Right) == doctest::Approx(5.5));
  CHECK(front_position(u, grid, 0.5, Side::Left) == doctest::Approx(-0.5));
}

TEST_CASE("no crossing is an error") {
  const Grid grid = Grid::make(5.0, 0.5);
  const std::vector<double> low(grid.n, 0.1);
  try {
    (void)front_position(low, grid, 0.5, Side::Right);
    FAIL("expected NoCrossing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoCrossing);
  }
}

TEST_CASE("fit of an exact line") {
  const SpeedEstimate e = estimate_speed(line_trace(2.5, 3.0));
  CHECK(e.speed == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(e.intercept == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(e.rms_residual <= 1e-10);
  CHECK(e.t_lo == doctest::Approx(25.0));
  CHECK(e.t_hi == doctest::Approx(50.0));
  CHECK(e.points == 101);
  const SpeedEstimate w = estimate_speed(line_trace(-1.5, 0.0), 10.0, 20.0);
  CHECK(w.speed == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(w.points == 41);
}

TEST_CASE("small oscillations barely move the fitted slope") {
  const SpeedEstimate e = estimate_speed(line_trace(2.0, 1.0, 0.05));
  CHECK(e.speed == doctest::Approx(2.0).epsilon(5e-3));
  CHECK(e.rms_residual > 0.01);
}

TEST_CASE("too few points") {
  FrontTrace t;
  for (int i = 0; i < 5; ++i) t.points.push_back({double(i), double(i)});
  try {
    (void)estimate_speed(t);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
  }
}

TEST_CASE("uniform speed verdicts") {
  const auto ok = uniform_speed_verdict({estimate(2.70, 0), estimate(2.70, 0, Side::Left)}, 2.708, 0.04);
  CHECK(ok.uniform);
  CHECK(ok.max_rel_dev_from_predicted == doctest::Approx(0.008 / 2.708));
  CHECK(ok.max_pairwise_rel_dev == doctest::Approx(0.0).epsilon(1e-12));

  const auto bad = uniform_speed_verdict({estimate(2.7, 0), estimate(3.4, 1)}, 2.708, 0.04);
  CHECK_FALSE(bad.uniform);
  CHECK(bad.max_pairwise_rel_dev == doctest::Approx(0.7 / 3.05));
  CHECK(bad.max_pairwise_rel_dev == doctest::Approx(0.23).epsilon(0.01));

  const auto off = uniform_speed_verdict({estimate(3.0, 0), estimate(3.0, 1)}, 2.708, 0.04);
  CHECK_FALSE(off.uniform);
}

TEST_CASE("translating profile: speed independent of the threshold and side") {
  const Grid grid = Grid::make(60.0, 0.1);
  std::vector<FrontTrace> traces;
  for (double theta : {0.25, 0.5, 0.75}) {
    for (Side side : {Side::Right, Side::Left}) {
      FrontTrace t;
      t.theta = theta;
      t.side = side;
      for (int i = 0; i <= 80; ++i) {
        const double time = 0.25 * i;
        t.points.push_back({time, front_position(plateau_profile(grid, 5.0 + 2.0 * time), grid, theta, side)});
      }
      traces.push_back(t);
    }
  }
  std::vector<SpeedEstimate> est;
  for (const auto& t : traces) est.push_back(estimate_speed(t));
  for (const auto& e : est) CHECK(std::abs(e.speed) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(uniform_speed_verdict(est, 2.0, 0.01).uniform);
}
