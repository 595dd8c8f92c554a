#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "frontlab/bounds.hpp"
#include "frontlab/error.hpp"

using namespace frontlab;

namespace {

Kernel gaussian(double s) {
  const double p[] = {s};
  return make_kernel(KernelFamily::Gaussian, p);
}

Dispersal gaussians(std::size_t m) { return Dispersal::nonlocal(std::vector<Kernel>(m, gaussian(1.0))); }

// Stationary profile equal to the upper equilibrium.
class ConstantProfile final : public Profile {
 public:
  explicit ConstantProfile(std::vector<double> p) : p_(std::move(p)) {}
  std::size_t size() const override { return p_.size(); }
  double start_time() const override { return 0.0; }
  double value(std::size_t j, double, double) const override { return p_[j]; }
  double time_derivative(std::size_t, double, double) const override { return 0.0; }
  bool near_kink(std::size_t, double, double, double) const override { return false; }

 private:
  std::vector<double> p_;
};

// Fake run whose snapshots sample a profile exactly.
SimulationOutput sampled_run(const Profile& prof, const Grid& grid, const std::vector<double>& times) {
  SimulationOutput sim;
  sim.grid = grid;
  for (double t : times) {
    FieldState s{t, {}};
    for (std::size_t j = 0; j < prof.size(); ++j) {
      std::vector<double> u(grid.n);
      for (std::size_t i = 0; i < grid.n; ++i) u[i] = prof.value(j, t, grid.x(i));
      s.components.push_back(std::move(u));
    }
    sim.snapshots.push_back(std::move(s));
  }
  return sim;
}

double finite_max(const ResidualReport& r) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : r.slices)
    for (const auto& f : s.fields)
      for (double v : f)
        if (!std::isnan(v)) m = std::max(m, v);
  return m;
}

}  // namespace

TEST_CASE("G vanishes on the Perron pair and is positive at larger rates") {
  const ReactionModel model = builtin_model("chain", {{"m", 3}}, {1.0, 0.5, 2.0});
  const Dispersal disp = gaussians(3);
  const double lambda_star = minimize_speed(model, disp).lambda_star;
  for (int i = 1; i <= 20; ++i) {
    const double lambda = lambda_star * i / 20.0;
    const WaveSpeed ws = wave_speed(model, disp, lambda);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(G_value(model, disp, ws.speed, lambda, j, ws.vector)) <= 1e-9);
    if (i < 20) {
      const double mu = 0.5 * (lambda + lambda_star);
      const WaveSpeed wm = wave_speed(model, disp, mu);
      for (std::size_t j = 0; j < 3; ++j) CHECK(G_value(model, disp, ws.speed, mu, j, wm.vector) > 0.0);
    }
  }
}

TEST_CASE("upper profile amplitude and supersolution residual") {
  const ReactionModel model = builtin_model("scalar_kpp");
  const Dispersal disp = gaussians(1);
  const Grid grid = Grid::make(30.0, 0.1);
  const AnalyticProfile up = build_upper(model, disp, 0.5, {ExponentialDecay{{1.0}, {1.0}}}, grid);
  CHECK(up.amplitude == 1.0);
  CHECK(up.speed == doctest::Approx(2.0 * std::exp(0.125)).epsilon(1e-12));
  CHECK(up.value(0, up.t_origin, 4.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(up.value(0, up.t_origin, 0.0) == 1.0);

  const auto res = residual(up, model, disp, grid, {0.0, 2.0, 5.0});
  CHECK(res.min >= -residual_tolerance(model, grid.dx));
  CHECK(res.nodes_excluded > 0);

  try {
    (void)build_upper(model, disp, 0.5, {ExponentialDecay{{0.3}, {1.0}}}, grid);
    FAIL("expected DominationImpossible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DominationImpossible);
  }
}

TEST_CASE("lower two-exponential profile geometry and subsolution residual") {
  const ReactionModel model = builtin_model("coupled_logistic");
  const Dispersal disp = gaussians(2);
  const Grid grid = Grid::make(40.0, 0.1);
  const double y0 = 10.0;
  const A3Params a3 = default_A3_params(model);
  const AnalyticProfile lo = build_lower(model, disp, 0.4, 1.0, 1.0, y0, a3);
  CHECK(lo.delta == doctest::Approx(std::min(1.0, (1.0 / 0.4 - 1.0) / 2.0)));
  CHECK(lo.mu == doctest::Approx(0.4 * (1.0 + lo.delta)));
  CHECK(lo.amplitude * std::exp(-lo.lambda * y0) <= a3.q0);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(lo.peaks[j] >= y0);
    CHECK(lo.peaks[j] > lo.roots[j]);
    const double t = 3.0;
    const double x_root = lo.roots[j] + lo.speed * (t - lo.t_origin);
    CHECK(std::abs(lo.value(j, t, x_root)) <= 1e-12);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) sup = std::max(sup, lo.value(j, lo.t_origin, grid.x(i)));
    CHECK(sup <= lo.amplitude * std::exp(-lo.lambda * y0) * lo.v_lambda(static_cast<Eigen::Index>(j)) + 1e-15);
    CHECK(lo.value(j, lo.t_origin, 0.0) == 0.0);
  }
  const auto res = residual(lo, model, disp, grid, {1.0, 3.0, 6.0});
  CHECK(res.max <= residual_tolerance(model, grid.dx));
  CHECK(finite_max(res) == res.max);
}

TEST_CASE("constant equilibrium has zero residual") {
  const ReactionModel model = builtin_model("coupled_logistic");
  const Grid grid = Grid::make(10.0, 0.1);
  const auto res = residual(ConstantProfile({1.0, 1.0}), model, gaussians(2), grid, {0.0, 1.0});
  CHECK(res.min == 0.0);
  CHECK(res.max == 0.0);
  CHECK(res.nodes_checked > 0);
}

TEST_CASE("amplitude fits against a given state") {
  const Grid grid = Grid::make(20.0, 0.1);
  FieldState s{0.0, {std::vector<double>(grid.n)}};
  for (std::size_t i = 0; i < grid.n; ++i) s.components[0][i] = 0.3 * std::exp(-0.5 * std::abs(grid.x(i)));
  Eigen::VectorXd v(1);
  v << 1.0;
  CHECK(lower_amplitude_from_state(s, grid, 0.5, v, 10.0) == 0.25);
  CHECK(cascade_seed(s, grid, 0, 0.5) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(cascade_seed(s, grid, 0, 0.4) == doctest::Approx(0.3 * std::exp(-0.1 * 20.0)).epsilon(1e-12));
}

TEST_CASE("cascade constants for two coupled components") {
  const ReactionModel model = builtin_model("coupled_logistic");
  const ComponentOrder order = reorder_components(model.jacobian0(), {0.5, 1.0});
  const double q3 = find_cascade_q3(model);
  CHECK(q3 > 0.0);
  CHECK(std::log2(q3) == std::floor(std::log2(q3)));
  const CascadeProfile c = build_cascade(model, order, 0.5, 1.0, q3);
  CHECK(c.alpha == doctest::Approx(3.5));
  CHECK(c.betas[1] == doctest::Approx(2.5));
  CHECK(c.T == doctest::Approx(1.0 + std::log(2.0)));
  CHECK(c.amps[1] == doctest::Approx(c.amps[0] / 8.0));
  CHECK(c.M0 == doctest::Approx(c.amps[0] / 8.0 * std::pow(2.0, -3.5)));
  CHECK(c.value(1, 1.0, 0.0) == 0.0);
  CHECK(c.value(0, 1.0, 2.0) == doctest::Approx(c.amps[0] * std::exp(-1.0)));
  for (double a : c.amps) CHECK(a <= q3);

  const Grid grid = Grid::make(30.0, 0.1);
  std::vector<double> times;
  for (int k = 0; k <= 8; ++k) times.push_back(1.0 + c.T * k / 8.0);
  const auto res = residual(c, model, gaussians(2), grid, times);
  CHECK(res.max <= residual_tolerance(model, grid.dx));
}

TEST_CASE("cascade inequality holds on the returned box") {
  const ReactionModel model = builtin_model("chain", {{"m", 3}});
  const double q = find_cascade_q3(model);
  const auto& J = model.jacobian0();
  for (const auto& u : sample_box(std::vector<double>(3, q), 500, 42)) {
    const auto f = model.eval(u);
    for (int j = 0; j < 3; ++j) {
      double rhs = (J(j, j) - 1.0) * u[j];
      for (int i = 0; i < 3; ++i)
        if (i != j) rhs += 0.5 * J(j, i) * u[i];
      CHECK(f[j] >= rhs - 1e-12);
    }
  }
}

TEST_CASE("cascade along a chain uses the feeder schedule") {
  const ReactionModel model = builtin_model("chain", {{"m", 3}});
  const ComponentOrder order = reorder_components(model.jacobian0(), {0.4, 1.0, 1.0});
  const CascadeProfile c = build_cascade(model, order, 0.4, 0.5, find_cascade_q3(model));
  const double tau = std::log(2.0);
  CHECK(c.T == doctest::Approx(1.0 + 2.0 * tau));
  CHECK(c.origins[0] == 1.0);
  CHECK(c.origins[1] == 1.0);
  CHECK(c.origins[2] == doctest::Approx(1.0 + tau));
  CHECK(*order.feeder[2] == order.permutation[1]);
  CHECK(c.value(order.permutation[2], 1.0 + 0.5 * tau, 0.0) == 0.0);
  CHECK(c.value(order.permutation[2], 1.0 + 2.0 * tau, 0.0) > 0.0);

  const ReactionModel scalar = builtin_model("scalar_kpp");
  ComponentOrder single;
  single.permutation = {0};
  single.feeder = {std::nullopt};
  single.depth = {0};
  CHECK(build_cascade(scalar, single, 0.5, 1.0, 0.5).T == 1.0);
  CHECK_THROWS_AS(build_cascade(model, single, 0.5, 1.0, 0.5), Error);
}

TEST_CASE("sandwich of a profile with itself") {
  const ReactionModel model = builtin_model("scalar_kpp");
  const Grid grid = Grid::make(20.0, 0.1);
  const AnalyticProfile up = build_upper(model, gaussians(1), 0.5, {ExponentialDecay{{1.0}, {1.0}}}, grid);
  SimulationOutput sim = sampled_run(up, grid, {0.0, 1.0, 2.0});
  const SandwichReport ok = sandwich_test(sim, model, &up, &up);
  CHECK(ok.passed());
  CHECK(ok.snapshots_checked == 3);
  CHECK(ok.worst_upper_gap == 0.0);
  CHECK(ok.worst_lower_gap == 0.0);

  sim.snapshots[1].components[0][grid.center() + 50] += 1e-3;  // x = 5, away from kinks
  const SandwichReport bad = sandwich_test(sim, model, nullptr, &up);
  CHECK_FALSE(bad.passed());
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].bound == "upper");
  CHECK(bad.violations[0].x == doctest::Approx(5.0));
  CHECK(bad.violations[0].excess == doctest::Approx(1e-3 - bad.slack).epsilon(1e-6));
}
