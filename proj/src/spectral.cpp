#include "frontlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

constexpr double kSymbolOverflow = 1e100;

void require_rate(const Dispersal& dispersal, double lambda) {
  const double max_rate = dispersal.max_rate();
  if (!(lambda > 0.0) || !(lambda < max_rate)) {
    std::ostringstream msg;
    msg << "rate " << lambda << " outside (0, " << max_rate << ")";
    throw Error(ErrorKind::RateOutOfRange, msg.str());
  }
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo * std::exp(step * static_cast<double>(i));
  }
  out.back() = hi;
  return out;
}

struct CurveMinimum {
  std::size_t best_index = 0;
  double argmin = 0.0;
};

// Scan f on the given abscissae, then refine between the neighbours of the
// best sample. The scan values are returned through `values`.
CurveMinimum scan_and_refine(const std::function<double(double)>& f,
                             const std::vector<double>& grid, std::vector<double>& values,
                             double tol) {
  values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid[i]);
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  const std::size_t left = best == 0 ? 0 : best - 1;
  const std::size_t right = std::min(best + 1, grid.size() - 1);
  return {best, golden_section_minimize(f, grid[left], grid[right], tol)};
}

}  // namespace

Dispersal Dispersal::nonlocal(std::vector<Kernel> kernels) {
  return Dispersal{DispersalMode::Nonlocal, std::move(kernels)};
}

Dispersal Dispersal::laplacian() { return Dispersal{DispersalMode::Laplacian, {}}; }

double Dispersal::symbol(std::size_t j, double lambda) const {
  if (mode == DispersalMode::Laplacian) return lambda * lambda;
  return mgf(kernels.at(j), lambda) - 1.0;
}

double Dispersal::max_rate() const {
  double rate = kInfinity;
  if (mode == DispersalMode::Nonlocal) {
    for (const auto& k : kernels) rate = std::min(rate, k.max_rate());
  }
  return rate;
}

SpeedMatrix build_speed_matrix(const ReactionModel& model, const Dispersal& dispersal,
                               double lambda) {
  const std::size_t m = model.size();
  if (dispersal.mode == DispersalMode::Nonlocal && dispersal.kernels.size() != m) {
    throw Error(ErrorKind::InvalidParam, "need one kernel per component");
  }
  require_rate(dispersal, lambda);
  SpeedMatrix out{lambda, model.jacobian0()};
  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.entries(jj, jj) += model.diffusion()[j] * dispersal.symbol(j, lambda);
  }
  return out;
}

SpeedMatrix build_speed_matrix(const ReactionModel& model, const std::vector<Kernel>& kernels,
                               double lambda) {
  return build_speed_matrix(model, Dispersal::nonlocal(kernels), lambda);
}

PerronPair perron_eigenpair(const Eigen::MatrixXd& a, const PowerIterationOptions& options) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::InvalidParam, "Perron eigenpair needs a nonempty square matrix");
  }
  if (!a.allFinite()) {
    throw Error(ErrorKind::InvalidParam, "Perron eigenpair needs finite entries");
  }
  const Eigen::Index m = a.rows();
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != j && a(j, i) < 0.0) {
        throw Error(ErrorKind::InvalidParam,
                    "Perron eigenpair needs an essentially nonnegative matrix");
      }
    }
  }
  if (!check_irreducible(a)) {
    throw Error(ErrorKind::Reducible, "matrix is reducible; Perron vector need not be positive");
  }

  const double shift = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  PerronPair pair;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd av = a * v;
    const double gamma = v.dot(av);
    const double residual = (av - gamma * v).norm();
    if (residual <= options.tol * scale) {
      pair.gamma = gamma;
      pair.vector = v;
      pair.iterations = it;
      pair.residual = residual;
      if ((v.array() <= 0.0).any()) {
        throw Error(ErrorKind::NoConvergence, "power iteration produced a non-positive vector");
      }
      return pair;
    }
    v = av + shift * v;
    v /= v.norm();
  }
  std::ostringstream msg;
  msg << "power iteration did not converge in " << options.max_iterations << " iterations";
  throw Error(ErrorKind::NoConvergence, msg.str());
}

WaveSpeed wave_speed(const ReactionModel& model, const Dispersal& dispersal, double lambda) {
  const PerronPair pair = perron_eigenpair(build_speed_matrix(model, dispersal, lambda));
  return {lambda, pair.gamma, pair.gamma / lambda, pair.vector};
}

WaveSpeed wave_speed(const ReactionModel& model, const std::vector<Kernel>& kernels,
                     double lambda) {
  return wave_speed(model, Dispersal::nonlocal(kernels), lambda);
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    // Ties move left so the smallest minimizer is kept.
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double scalar_speed(const Kernel& kernel, double diffusion, double growth, double sigma) {
  if (!(sigma > 0.0) || !(sigma < kernel.max_rate())) {
    std::ostringstream msg;
    msg << "decay rate " << sigma << " outside (0, " << kernel.max_rate() << ")";
    throw Error(ErrorKind::RateOutOfRange, msg.str());
  }
  auto speed = [&](double s) { return (diffusion * (mgf(kernel, s) - 1.0) + growth) / s; };

  const Dispersal dispersal = Dispersal::nonlocal({kernel});
  std::vector<double> values;
  const auto grid = log_spaced(1e-3, default_bracket_hi(dispersal), 200);
  const double sigma_star = scan_and_refine(speed, grid, values, 1e-10).argmin;
  if (!(sigma < sigma_star)) {
    std::ostringstream msg;
    msg << "decay rate " << sigma << " is not below the minimizing rate " << sigma_star;
    throw Error(ErrorKind::RateOutOfRange, msg.str());
  }
  return speed(sigma);
}

double default_bracket_hi(const Dispersal& dispersal) {
  const double max_rate = dispersal.max_rate();
  double hi = std::isfinite(max_rate) ? 0.95 * max_rate : 50.0;
  const std::size_t count = dispersal.mode == DispersalMode::Nonlocal ? dispersal.kernels.size() : 1;
  auto overflows = [&](double lambda) {
    for (std::size_t j = 0; j < count; ++j) {
      const double s = dispersal.symbol(j, lambda);
      if (!std::isfinite(s) || s > kSymbolOverflow) return true;
    }
    return false;
  };
  while (overflows(hi) && hi > 1e-3) hi *= 0.5;
  return hi;
}

DispersionCurve minimize_speed(const ReactionModel& model, const Dispersal& dispersal,
                               const SpeedSearch& search) {
  if (!check_irreducible(model.jacobian0())) {
    throw Error(ErrorKind::Reducible, "F'(0) is reducible; no single Perron speed curve");
  }
  DispersionCurve curve;
  curve.bracket_lo = search.lo.value_or(1e-3);
  curve.bracket_hi = search.hi.value_or(default_bracket_hi(dispersal));
  if (!(curve.bracket_lo > 0.0) || !(curve.bracket_hi > curve.bracket_lo) ||
      !(curve.bracket_hi < dispersal.max_rate())) {
    std::ostringstream msg;
    msg << "search bracket [" << curve.bracket_lo << ", " << curve.bracket_hi
        << "] must lie inside (0, " << dispersal.max_rate() << ")";
    throw Error(ErrorKind::RateOutOfRange, msg.str());
  }
  const std::size_t count = std::max<std::size_t>(search.samples, 3);
  const auto grid = log_spaced(curve.bracket_lo, curve.bracket_hi, count);

  auto speed = [&](double lambda) { return wave_speed(model, dispersal, lambda).speed; };
  std::vector<double> values;
  const CurveMinimum minimum = scan_and_refine(speed, grid, values, search.tol);
  curve.lambda_star = minimum.argmin;
  curve.c_star = speed(curve.lambda_star);

  curve.samples.reserve(count);
  for (double lambda : grid) {
    const WaveSpeed w = wave_speed(model, dispersal, lambda);
    curve.samples.push_back({lambda, w.gamma, w.speed, w.vector});
  }

  const double edge_tol = 2.0 * search.tol;
  if (curve.lambda_star - curve.bracket_lo <= edge_tol ||
      curve.bracket_hi - curve.lambda_star <= edge_tol) {
    std::ostringstream msg;
    msg << "speed minimum at lambda = " << curve.lambda_star << " sits on the bracket edge ["
        << curve.bracket_lo << ", " << curve.bracket_hi << "]";
    throw Error(ErrorKind::BoundaryMinimum, msg.str());
  }

  const auto& s = curve.samples;
  for (std::size_t i = 0; i + 1 < s.size() && s[i + 1].lambda <= curve.lambda_star; ++i) {
    if (!(s[i + 1].speed < s[i].speed)) curve.decreasing_below_star = false;
    if (i + 2 < s.size() && s[i + 2].lambda <= curve.lambda_star) {
      const double left = (s[i + 1].speed - s[i].speed) / (s[i + 1].lambda - s[i].lambda);
      const double right = (s[i + 2].speed - s[i + 1].speed) / (s[i + 2].lambda - s[i + 1].lambda);
      const double h = std::min(s[i + 1].lambda - s[i].lambda, s[i + 2].lambda - s[i + 1].lambda);
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(s[i + 1].speed) / h;
      if (right - left < -(1e-8 + noise)) curve.convex_below_star = false;
    }
  }
  return curve;
}

bool check_irreducible(const Eigen::MatrixXd& jacobian0) {
  const auto m = static_cast<std::size_t>(jacobian0.rows());
  if (m <= 1) return true;
  auto reaches_all = [&](bool forward) {
    std::vector<bool> seen(m, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < m; ++j) {
        if (seen[j] || i == j) continue;
        // Edge i -> j iff f_j depends on u_i, i.e. jacobian0(j, i) > 0.
        const double coupling = forward ? jacobian0(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))
                                        : jacobian0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (coupling > 0.0) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reaches_all(true) && reaches_all(false);
}

ComponentOrder reorder_components(const Eigen::MatrixXd& jacobian0,
                                  const std::vector<double>& decay_rates) {
  const auto m = static_cast<std::size_t>(jacobian0.rows());
  if (decay_rates.size() != m) {
    throw Error(ErrorKind::InvalidParam, "need one decay rate per component");
  }
  for (double rate : decay_rates) {
    if (!(rate > 0.0)) throw Error(ErrorKind::InvalidRates, "decay rates must be positive");
  }
  ComponentOrder order;
  const auto first = static_cast<std::size_t>(
      std::min_element(decay_rates.begin(), decay_rates.end()) - decay_rates.begin());
  if (!std::isfinite(decay_rates[first])) {
    throw Error(ErrorKind::InvalidRates, "no component has a finite decay rate");
  }
  std::vector<bool> placed(m, false);
  std::vector<std::size_t> depth_of(m, 0);
  order.permutation.push_back(first);
  order.feeder.push_back(std::nullopt);
  order.depth.push_back(0);
  placed[first] = true;

  while (order.permutation.size() < m) {
    bool extended = false;
    for (std::size_t j = 0; j < m && !extended; ++j) {
      if (placed[j]) continue;
      std::optional<std::size_t> feeder;
      for (std::size_t i : order.permutation) {
        if (jacobian0(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) > 0.0 &&
            (!feeder || depth_of[i] < depth_of[*feeder])) {
          feeder = i;
        }
      }
      if (!feeder) continue;
      placed[j] = true;
      depth_of[j] = depth_of[*feeder] + 1;
      order.permutation.push_back(j);
      order.feeder.push_back(feeder);
      order.depth.push_back(depth_of[j]);
      extended = true;
    }
    if (!extended) {
      throw Error(ErrorKind::Reducible,
                  "cannot extend the component chain: F'(0) is reducible");
    }
  }
  return order;
}

}  // namespace frontlab
