#include "frontlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

constexpr std::size_t kMaxViolations = 32;
constexpr int kMaxDoublings = 200;

double largest_power_of_two_below(double bound) {
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw Error(ErrorKind::InvalidParam, "amplitude bound must be positive and finite");
  }
  return std::exp2(std::floor(std::log2(bound)));
}

std::vector<double> initial_rates(const InitialData& data) {
  if (const auto* e = std::get_if<ExponentialDecay>(&data.profile)) return e->rates;
  if (const auto* h = std::get_if<HypothesisH>(&data.profile)) return {h->lambda0};
  return {};
}

std::vector<double> initial_amplitudes(const InitialData& data, std::size_t m) {
  if (const auto* e = std::get_if<ExponentialDecay>(&data.profile)) return e->amplitudes;
  if (const auto* h = std::get_if<HypothesisH>(&data.profile)) {
    std::vector<double> amps(m, h->others_height);
    amps[h->j0] = h->amplitude;
    return amps;
  }
  return std::get<CompactData>(data.profile).heights;
}

}  // namespace

double G_value(const ReactionModel& model, const Dispersal& dispersal, double c, double lambda,
               std::size_t j, const Eigen::VectorXd& v) {
  const std::size_t m = model.size();
  if (j >= m || static_cast<std::size_t>(v.size()) != m) {
    throw Error(ErrorKind::InvalidParam, "component index or vector size out of range");
  }
  if (!(lambda > 0.0) || lambda >= dispersal.max_rate()) {
    throw Error(ErrorKind::RateOutOfRange, "rate outside the kernels' admissible range");
  }
  const auto& J = model.jacobian0();
  const double d = model.diffusion()[j];
  double g = (c * lambda - d * dispersal.symbol(j, lambda)) * v(static_cast<Eigen::Index>(j));
  for (std::size_t i = 0; i < m; ++i) {
    g -= J(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) *
         v(static_cast<Eigen::Index>(i));
  }
  return g;
}

double AnalyticProfile::value(std::size_t j, double t, double x) const {
  const auto jj = static_cast<Eigen::Index>(j);
  const double z = std::abs(x) - speed * (t - t_origin);
  if (kind == AnalyticKind::Upper) {
    return std::min(cap[j], amplitude * std::exp(-lambda * z) * v_lambda(jj));
  }
  if (z <= roots[j]) return 0.0;
  const double w = amplitude * std::exp(-lambda * z) * v_lambda(jj) - L * std::exp(-mu * z) * v_mu(jj);
  return std::max(0.0, w);
}

double AnalyticProfile::time_derivative(std::size_t j, double t, double x) const {
  const auto jj = static_cast<Eigen::Index>(j);
  const double z = std::abs(x) - speed * (t - t_origin);
  if (kind == AnalyticKind::Upper) {
    const double w = amplitude * std::exp(-lambda * z) * v_lambda(jj);
    return w >= cap[j] ? 0.0 : speed * lambda * w;
  }
  if (z <= roots[j]) return 0.0;
  return speed * (lambda * amplitude * std::exp(-lambda * z) * v_lambda(jj) -
                  mu * L * std::exp(-mu * z) * v_mu(jj));
}

bool AnalyticProfile::near_kink(std::size_t j, double t, double x, double tol) const {
  if (std::abs(x) <= tol) return true;
  const double shift = speed * (t - t_origin);
  double locus = 0.0;
  if (kind == AnalyticKind::Upper) {
    locus = shift + std::log(amplitude * v_lambda(static_cast<Eigen::Index>(j)) / cap[j]) / lambda;
  } else {
    locus = shift + roots[j];
  }
  return std::abs(std::abs(x) - locus) <= tol;
}

AnalyticProfile build_upper(const ReactionModel& model, const Dispersal& dispersal, double lambda,
                            const InitialData& data, const Grid& grid) {
  const std::size_t m = model.size();
  for (double r : initial_rates(data)) {
    if (r < lambda) {
      std::ostringstream msg;
      msg << "initial decay rate " << r << " is below lambda = " << lambda
          << "; no exponential with that rate dominates the data";
      throw Error(ErrorKind::DominationImpossible, msg.str());
    }
  }
  const WaveSpeed ws = wave_speed(model, dispersal, lambda);
  AnalyticProfile prof;
  prof.kind = AnalyticKind::Upper;
  prof.lambda = lambda;
  prof.speed = ws.speed;
  prof.v_lambda = ws.vector;
  prof.cap = model.equilibrium();

  const auto amps = initial_amplitudes(data, m);
  double base = 0.0;
  for (std::size_t j = 0; j < m; ++j) base = std::max(base, amps[j] / ws.vector(static_cast<Eigen::Index>(j)));
  if (!(base > 0.0)) base = 1.0;

  const FieldState u0 = init_state(grid, model, data);
  double need = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double vj = ws.vector(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double u = u0.components[j][i];
      if (u > 0.0) need = std::max(need, u * std::exp(lambda * std::abs(grid.x(i))) / vj);
    }
  }
  double gamma = base;
  int k = 0;
  while (gamma < need * (1.0 - 1e-12)) {
    if (++k > kMaxDoublings) {
      throw Error(ErrorKind::DominationImpossible, "initial data not dominated by any exponential");
    }
    gamma *= 2.0;
  }
  prof.amplitude = gamma;
  return prof;
}

AnalyticProfile build_lower(const ReactionModel& model, const Dispersal& dispersal, double lambda,
                            double lambda_star, double gamma, double y0, const A3Params& a3,
                            double t_origin) {
  const std::size_t m = model.size();
  if (!(lambda > 0.0) || !(lambda < lambda_star)) {
    throw Error(ErrorKind::RateOutOfRange, "lower profile needs 0 < lambda < lambda_star");
  }
  if (!(gamma > 0.0) || !(y0 > 0.0) || !(a3.q0 > 0.0) || !(a3.delta0 > 0.0) || !(a3.M > 0.0)) {
    throw Error(ErrorKind::InvalidParam, "gamma, y0, q0, delta0 and M must be positive");
  }
  AnalyticProfile prof;
  prof.kind = AnalyticKind::LowerTwoExp;
  prof.lambda = lambda;
  prof.y0 = y0;
  prof.q0 = a3.q0;
  prof.t_origin = t_origin;
  while (gamma * std::exp(-lambda * y0) > a3.q0) gamma *= 0.5;
  prof.amplitude = gamma;

  prof.delta = std::min(a3.delta0, 0.5 * (lambda_star / lambda - 1.0));
  prof.mu = lambda * (1.0 + prof.delta);
  if (prof.mu >= dispersal.max_rate()) {
    throw Error(ErrorKind::RateOutOfRange, "second rate mu exceeds the kernels' admissible range");
  }
  const WaveSpeed at_lambda = wave_speed(model, dispersal, lambda);
  const WaveSpeed at_mu = wave_speed(model, dispersal, prof.mu);
  prof.speed = at_lambda.speed;
  prof.v_lambda = at_lambda.vector;
  prof.v_mu = at_mu.vector;

  const double delta = prof.delta;
  double ratio = 0.0;
  double growth = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    ratio = std::max(ratio, prof.v_lambda(jj) / prof.v_mu(jj));
    const double g = G_value(model, dispersal, prof.speed, prof.mu, j, prof.v_mu);
    if (!(g > 0.0)) {
      std::ostringstream msg;
      msg << "G(c(lambda), mu; " << j + 1 << ") = " << g << " is not positive";
      throw Error(ErrorKind::RateOutOfRange, msg.str());
    }
    growth = std::max(growth, std::pow(prof.v_lambda(jj), 1.0 + delta) / g);
  }
  prof.L = std::max(gamma * std::exp(lambda * delta * y0) / (1.0 + delta) * ratio,
                    a3.M * std::pow(gamma, 1.0 + delta) * growth);

  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double base = prof.L * prof.v_mu(jj) / (gamma * prof.v_lambda(jj));
    prof.peaks.push_back(std::log((1.0 + delta) * base) / (lambda * delta));
    prof.roots.push_back(std::log(base) / (lambda * delta));
  }
  return prof;
}

double lower_amplitude_from_state(const FieldState& state, const Grid& grid, double lambda,
                                  const Eigen::VectorXd& v, double y0) {
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < state.components.size(); ++j) {
    const double vj = v(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double shape = std::exp(-lambda * std::max(std::abs(grid.x(i)), y0)) * vj;
      bound = std::min(bound, state.components[j][i] / shape);
    }
  }
  return largest_power_of_two_below(bound);
}

double CascadeProfile::p(double x) const { return std::exp(-lambda0 * std::abs(x)); }

std::size_t CascadeProfile::position(std::size_t j) const {
  const auto& perm = order.permutation;
  const auto it = std::find(perm.begin(), perm.end(), j);
  if (it == perm.end()) throw Error(ErrorKind::InvalidParam, "component not in the cascade order");
  return static_cast<std::size_t>(it - perm.begin());
}

double CascadeProfile::value(std::size_t j, double t, double x) const {
  const std::size_t k = position(j);
  const double s = t - origins[k];
  if (s < 0.0) return 0.0;
  if (k == 0) return amps[0] * std::exp(-alpha * s) * p(x);
  return amps[k] * (std::exp(-betas[k] * s) - std::exp(-alpha * s)) * p(x);
}

double CascadeProfile::time_derivative(std::size_t j, double t, double x) const {
  const std::size_t k = position(j);
  const double s = t - origins[k];
  if (s < 0.0) return 0.0;
  if (k == 0) return -alpha * amps[0] * std::exp(-alpha * s) * p(x);
  return amps[k] * (alpha * std::exp(-alpha * s) - betas[k] * std::exp(-betas[k] * s)) * p(x);
}

bool CascadeProfile::near_kink(std::size_t, double, double x, double tol) const {
  return std::abs(x) <= tol;
}

double find_cascade_q3(const ReactionModel& model, std::size_t sample_count, std::uint64_t seed) {
  const std::size_t m = model.size();
  const auto& J = model.jacobian0();
  const auto& p = model.equilibrium();
  double q = *std::min_element(p.begin(), p.end());
  std::vector<double> f(m);
  for (int attempt = 0; attempt < 60; ++attempt, q *= 0.5) {
    const std::vector<double> upper(m, q);
    bool ok = true;
    for (const auto& u : sample_box(upper, sample_count, seed)) {
      model.eval(u, f);
      for (std::size_t j = 0; j < m && ok; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        double rhs = (J(jj, jj) - 1.0) * u[j];
        for (std::size_t i = 0; i < m; ++i) {
          if (i != j) rhs += 0.5 * J(jj, static_cast<Eigen::Index>(i)) * u[i];
        }
        ok = f[j] >= rhs - 1e-14 * (1.0 + std::abs(rhs));
      }
      if (!ok) break;
    }
    if (ok) return q;
  }
  throw Error(ErrorKind::NoConvergence, "no box [0, q] found on which the cascade inequality holds");
}

CascadeProfile build_cascade(const ReactionModel& model, const ComponentOrder& order,
                             double lambda0, double seed_amp, double q3) {
  const std::size_t m = model.size();
  if (order.permutation.size() != m || order.feeder.size() != m || order.depth.size() != m) {
    throw Error(ErrorKind::Reducible, "component order does not cover every component");
  }
  if (!(lambda0 > 0.0) || !(seed_amp > 0.0) || !(q3 > 0.0)) {
    throw Error(ErrorKind::InvalidParam, "lambda0, seed amplitude and q3 must be positive");
  }
  const auto& J = model.jacobian0();
  const auto& d = model.diffusion();
  auto fjj = [&](std::size_t j) { return J(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)); };

  CascadeProfile prof;
  prof.order = order;
  prof.lambda0 = lambda0;
  prof.q3 = q3;
  prof.tau = std::log(2.0);
  prof.T = 1.0 + static_cast<double>(m - 1) * prof.tau;
  prof.alpha = 0.0;
  for (std::size_t j = 0; j < m; ++j) prof.alpha = std::max(prof.alpha, d[j] + std::abs(fjj(j)));
  prof.alpha += 2.0;

  prof.betas.assign(m, 0.0);
  prof.origins.assign(m, 1.0);
  std::vector<double> ready(m, 1.0);  // time from which the floor bound holds
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t j = order.permutation[k];
    prof.betas[k] = d[j] + std::abs(fjj(j)) + 1.0;
    const std::size_t feeder_pos = prof.position(*order.feeder[k]);
    if (feeder_pos >= k) throw Error(ErrorKind::Reducible, "feeder placed after its dependant");
    prof.origins[k] = ready[feeder_pos];
    ready[k] = prof.origins[k] + prof.tau;
  }

  double M1 = std::min(seed_amp, q3);
  for (;; M1 *= 0.5, ++prof.halvings) {
    prof.amps.assign(m, 0.0);
    prof.floors.assign(m, 0.0);
    prof.amps[0] = M1;
    prof.floors[0] = M1;
    bool capped = true;
    for (std::size_t k = 1; k < m; ++k) {
      const std::size_t j = order.permutation[k];
      const std::size_t feeder = *order.feeder[k];
      const std::size_t fp = prof.position(feeder);
      const double coupling = J(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(feeder));
      const double shift = prof.origins[k] - 1.0;
      prof.amps[k] = coupling * prof.floors[fp] * std::exp(-prof.alpha * shift) /
                     (2.0 * (prof.alpha - d[j] + fjj(j) - 1.0));
      prof.floors[k] = prof.amps[k] * std::exp(prof.alpha * shift);
      capped = capped && prof.amps[k] <= q3;
    }
    if (capped) break;
    if (prof.halvings > 200) throw Error(ErrorKind::NoConvergence, "cascade amplitudes never fit under q3");
  }

  prof.M0 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    prof.M0 = std::min(prof.M0, prof.floors[k] * std::exp(-prof.alpha * (prof.T - 1.0)));
  }
  return prof;
}

double cascade_seed(const FieldState& state, const Grid& grid, std::size_t component,
                    double lambda0) {
  double c0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.n; ++i) {
    c0 = std::min(c0, state.components.at(component)[i] * std::exp(lambda0 * std::abs(grid.x(i))));
  }
  return c0;
}

double residual_tolerance(const ReactionModel& model, double dx) {
  const auto& d = model.diffusion();
  const auto& p = model.equilibrium();
  return dx * *std::max_element(d.begin(), d.end()) * *std::max_element(p.begin(), p.end());
}

ResidualReport residual(const Profile& profile, const ReactionModel& model,
                        const Dispersal& dispersal, const Grid& grid,
                        const std::vector<double>& times, double tail_tol) {
  const std::size_t m = model.size();
  const std::size_t n = grid.n;
  if (profile.size() != m) throw Error(ErrorKind::InvalidParam, "profile and model sizes differ");
  const auto& d = model.diffusion();

  std::vector<DiscreteKernel> stencils;
  std::size_t h = 1;
  if (dispersal.mode == DispersalMode::Nonlocal) {
    for (const auto& k : dispersal.kernels) {
      stencils.push_back(discretize(k, grid.dx, tail_tol));
      h = std::max(h, stencils.back().half_width);
    }
  }
  const double kink_tol = 2.0 * grid.dx;

  ResidualReport report;
  report.min = std::numeric_limits<double>::infinity();
  report.max = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> phi(m, std::vector<double>(n));
  std::vector<double> conv(n), node_u(m), node_f(m);

  for (double t : times) {
    if (t < profile.start_time()) continue;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) phi[j][i] = profile.value(j, t, grid.x(i));
    }
    ResidualSlice slice;
    slice.time = t;
    slice.fields.assign(m, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t j = 0; j < m; ++j) {
      if (dispersal.mode == DispersalMode::Nonlocal) {
        conv = convolve(phi[j], stencils[j], Engine::Direct);
        for (std::size_t i = 0; i < n; ++i) slice.fields[j][i] = -d[j] * (conv[i] - phi[j][i]);
      } else {
        const double scale = d[j] / (grid.dx * grid.dx);
        for (std::size_t i = 0; i < n; ++i) {
          const double left = phi[j][i == 0 ? 0 : i - 1];
          const double right = phi[j][i + 1 == n ? i : i + 1];
          slice.fields[j][i] = -scale * ((left - phi[j][i]) + (right - phi[j][i]));
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.x(i);
      for (std::size_t j = 0; j < m; ++j) node_u[j] = phi[j][i];
      model.eval(node_u, node_f);
      const bool edge = i < h || i + h >= n;
      for (std::size_t j = 0; j < m; ++j) {
        double& r = slice.fields[j][i];
        if (edge || profile.near_kink(j, t, x, kink_tol)) {
          r = std::numeric_limits<double>::quiet_NaN();
          ++report.nodes_excluded;
          continue;
        }
        r += profile.time_derivative(j, t, x) - node_f[j];
        report.min = std::min(report.min, r);
        report.max = std::max(report.max, r);
        ++report.nodes_checked;
      }
    }
    report.slices.push_back(std::move(slice));
  }
  if (report.nodes_checked == 0) {
    report.min = 0.0;
    report.max = 0.0;
  }
  return report;
}

SandwichReport sandwich_test(const SimulationOutput& sim, const ReactionModel& model,
                             const Profile* lower, const Profile* upper,
                             const SandwichOptions& options) {
  const Grid& grid = sim.grid;
  const std::size_t m = model.size();
  SandwichReport report;
  report.slack = options.slack;
  if (options.kink_slack >= 0.0) {
    report.kink_slack = options.kink_slack;
  } else {
    const auto lip = lipschitz_bounds(model, options.lipschitz_samples);
    report.kink_slack = 10.0 * grid.dx * *std::max_element(lip.begin(), lip.end());
  }
  report.worst_lower_gap = std::numeric_limits<double>::infinity();
  report.worst_upper_gap = std::numeric_limits<double>::infinity();
  const double kink_tol = 2.0 * grid.dx;

  auto note = [&](double t, double x, std::size_t j, const char* which, double excess) {
    ++report.violation_count;
    if (report.violations.size() < 64 * kMaxViolations) report.violations.push_back({t, x, j, which, excess});
  };

  for (const auto& snap : sim.snapshots) {
    const double t = snap.time;
    const bool use_lower = lower && t >= lower->start_time();
    const bool use_upper = upper && t >= upper->start_time();
    if (!use_lower && !use_upper) continue;
    ++report.snapshots_checked;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double u = snap.components[j][i];
        ++report.nodes_checked;
        if (use_lower) {
          const double slack = lower->near_kink(j, t, x, kink_tol) ? report.kink_slack : report.slack;
          const double gap = u - lower->value(j, t, x);
          report.worst_lower_gap = std::min(report.worst_lower_gap, gap);
          if (gap < -slack) note(t, x, j, "lower", -gap - slack);
        }
        if (use_upper) {
          const double slack = upper->near_kink(j, t, x, kink_tol) ? report.kink_slack : report.slack;
          const double gap = upper->value(j, t, x) - u;
          report.worst_upper_gap = std::min(report.worst_upper_gap, gap);
          if (gap < -slack) note(t, x, j, "upper", -gap - slack);
        }
      }
    }
  }
  std::sort(report.violations.begin(), report.violations.end(),
            [](const auto& a, const auto& b) { return a.excess > b.excess; });
  if (report.violations.size() > kMaxViolations) report.violations.resize(kMaxViolations);
  if (!std::isfinite(report.worst_lower_gap)) report.worst_lower_gap = 0.0;
  if (!std::isfinite(report.worst_upper_gap)) report.worst_upper_gap = 0.0;
  return report;
}

}  // namespace frontlab
