#include "frontlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "frontlab/error.hpp"
#include "frontlab/quadrature.hpp"

namespace frontlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kSymmetryTol = 1e-12;

double tabulated_density(const Kernel::Tabulated& tab, double x) {
  const auto& xs = tab.positions;
  if (x < xs.front() || x > xs.back()) return 0.0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.end()) return tab.densities.back();
  const auto hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - t) * tab.densities[lo] + t * tab.densities[hi];
}

// Exact integral of the piecewise-linear density over [x, +inf).
double tabulated_upper_integral(const Kernel::Tabulated& tab, double x) {
  const auto& xs = tab.positions;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = std::max(xs[i], x);
    const double b = xs[i + 1];
    if (b <= a) continue;
    total += 0.5 * (b - a) *
             (tabulated_density(tab, a) + tabulated_density(tab, b));
  }
  return total;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::CompactBump: return "compact_bump";
    case KernelFamily::Tabulated: return "tabulated";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "laplace") return KernelFamily::Laplace;
  if (name == "compact_bump" || name == "compact") return KernelFamily::CompactBump;
  if (name == "tabulated") return KernelFamily::Tabulated;
  throw Error(ErrorKind::InvalidParam, "unknown kernel family '" + name + "'");
}

Kernel::Kernel(Params params) : params_(std::move(params)) {}

KernelFamily Kernel::family() const noexcept {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return KernelFamily::Gaussian; },
                        [](const Laplace&) { return KernelFamily::Laplace; },
                        [](const CompactBump&) { return KernelFamily::CompactBump; },
                        [](const Tabulated&) { return KernelFamily::Tabulated; },
                    },
                    params_);
}

double Kernel::density(double x) const {
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) {
            const double s = x / g.stddev;
            return std::exp(-0.5 * s * s) /
                   (g.stddev * std::sqrt(2.0 * std::numbers::pi));
          },
          [x](const Laplace& l) { return 0.5 * l.rate * std::exp(-l.rate * std::abs(x)); },
          [x](const CompactBump& c) {
            if (std::abs(x) >= c.radius) return 0.0;
            return (1.0 + std::cos(std::numbers::pi * x / c.radius)) / (2.0 * c.radius);
          },
          [x](const Tabulated& t) { return tabulated_density(t, x); },
      },
      params_);
}

double Kernel::max_rate() const noexcept {
  if (const auto* l = std::get_if<Laplace>(&params_)) return l->rate;
  return kInfinity;
}

double Kernel::support_radius() const noexcept {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return kInfinity; },
                        [](const Laplace&) { return kInfinity; },
                        [](const CompactBump& c) { return c.radius; },
                        [](const Tabulated& t) {
                          return std::max(std::abs(t.positions.front()),
                                          std::abs(t.positions.back()));
                        },
                    },
                    params_);
}

double Kernel::tail_mass(double x) const {
  x = std::abs(x);
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return std::erfc(x / (g.stddev * std::numbers::sqrt2)); },
          [x](const Laplace& l) { return std::exp(-l.rate * x); },
          [x](const CompactBump& c) {
            if (x >= c.radius) return 0.0;
            const double r = x / c.radius;
            return std::max(0.0, 1.0 - r - std::sin(std::numbers::pi * r) / std::numbers::pi);
          },
          [x](const Tabulated& t) { return 2.0 * tabulated_upper_integral(t, x); },
      },
      params_);
}

Kernel make_tabulated_kernel(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::NonNormalizable, "tabulated kernel needs at least two points");
  }
  std::sort(points.begin(), points.end());
  Kernel::Tabulated tab;
  for (const auto& [x, k] : points) {
    if (!std::isfinite(x) || !std::isfinite(k) || k < 0.0) {
      throw Error(ErrorKind::NonNormalizable,
                  "tabulated kernel densities must be finite and nonnegative");
    }
    if (!tab.positions.empty() && x <= tab.positions.back()) {
      throw Error(ErrorKind::InvalidParam, "tabulated kernel has duplicate positions");
    }
    tab.positions.push_back(x);
    tab.densities.push_back(k);
  }
  const std::size_t n = tab.positions.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    const double scale = 1.0 + std::abs(tab.positions[i]);
    if (std::abs(tab.positions[i] + tab.positions[j]) > kSymmetryTol * scale ||
        std::abs(tab.densities[i] - tab.densities[j]) >
            kSymmetryTol * (1.0 + tab.densities[i])) {
      std::ostringstream msg;
      msg << "tabulated kernel is not symmetric at x = " << tab.positions[i];
      throw Error(ErrorKind::NonSymmetric, msg.str());
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (tab.positions[i] >= 0.0 && tab.densities[i + 1] > tab.densities[i] + kSymmetryTol) {
      std::ostringstream msg;
      msg << "tabulated kernel increases on [0, inf) near x = " << tab.positions[i];
      throw Error(ErrorKind::NotUnimodal, msg.str());
    }
  }
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mass += 0.5 * (tab.positions[i + 1] - tab.positions[i]) *
            (tab.densities[i] + tab.densities[i + 1]);
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorKind::NonNormalizable, "tabulated kernel has zero mass");
  }
  for (double& k : tab.densities) k /= mass;
  return Kernel(std::move(tab));
}

Kernel make_kernel(KernelFamily family, std::span<const double> params) {
  if (family == KernelFamily::Tabulated) {
    if (params.size() % 2 != 0) {
      throw Error(ErrorKind::InvalidParam,
                  "tabulated kernel expects (position, density) pairs");
    }
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < params.size(); i += 2) {
      points.emplace_back(params[i], params[i + 1]);
    }
    return make_tabulated_kernel(std::move(points));
  }
  if (params.size() != 1 || !(params[0] > 0.0) || !std::isfinite(params[0])) {
    throw Error(ErrorKind::InvalidParam,
                to_string(family) + " kernel expects one positive finite parameter");
  }
  switch (family) {
    case KernelFamily::Gaussian: return Kernel(Kernel::Gaussian{params[0]});
    case KernelFamily::Laplace: return Kernel(Kernel::Laplace{params[0]});
    case KernelFamily::CompactBump: return Kernel(Kernel::CompactBump{params[0]});
    case KernelFamily::Tabulated: break;
  }
  throw Error(ErrorKind::InvalidParam, "unsupported kernel family");
}

double mgf(const Kernel& kernel, double lambda) {
  if (!(lambda >= 0.0) || lambda >= kernel.max_rate()) {
    std::ostringstream msg;
    msg << "exponential moment requested at rate " << lambda
        << " outside [0, " << kernel.max_rate() << ")";
    throw Error(ErrorKind::RateOutOfRange, msg.str());
  }
  if (lambda == 0.0) return 1.0;
  const double value = std::visit(
      Overloaded{
          [lambda](const Kernel::Gaussian& g) {
            const double s = lambda * g.stddev;
            return std::exp(0.5 * s * s);
          },
          [lambda](const Kernel::Laplace& l) {
            return l.rate * l.rate / (l.rate * l.rate - lambda * lambda);
          },
          [lambda, &kernel](const Kernel::CompactBump& c) {
            // Symmetric density: integrate k(y) cosh(lambda y) over [0, R].
            return 2.0 * integrate(
                             [&](double y) { return kernel.density(y) * std::cosh(lambda * y); },
                             0.0, c.radius, {.abs_tol = 5e-11});
          },
          [lambda, &kernel](const Kernel::Tabulated& t) {
            double total = 0.0;
            const double seg_tol = 1e-10 / static_cast<double>(t.positions.size());
            for (std::size_t i = 0; i + 1 < t.positions.size(); ++i) {
              total += integrate(
                  [&](double y) { return kernel.density(y) * std::exp(lambda * y); },
                  t.positions[i], t.positions[i + 1], {.abs_tol = seg_tol});
            }
            return total;
          },
      },
      kernel.params());
  return std::max(1.0, value);
}

DiscreteKernel discretize(const Kernel& kernel, double dx, double tail_tol,
                          const DiscretizeOptions& options) {
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw Error(ErrorKind::InvalidParam, "kernel discretization needs dx > 0");
  }
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw Error(ErrorKind::InvalidParam, "kernel tail tolerance must lie in (0, 1)");
  }
  auto tail_ok = [&](std::size_t h) {
    return kernel.tail_mass(static_cast<double>(h) * dx) < tail_tol;
  };

  // Doubling then bisection for the smallest admissible half width.
  std::size_t hi = 1;
  while (!tail_ok(hi)) {
    if (hi > options.max_half_width) {
      std::ostringstream msg;
      msg << "kernel stencil needs more than " << options.max_half_width
          << " cells per side at dx = " << dx << ", tail tolerance " << tail_tol;
      throw Error(ErrorKind::HalfWidthOverflow, msg.str());
    }
    hi *= 2;
  }
  std::size_t lo = hi / 2;  // tail_ok(lo) is false unless lo == 0
  if (lo == 0 && tail_ok(0)) hi = 0;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (tail_ok(mid) ? hi : lo) = mid;
  }
  const std::size_t h = hi;
  if (h > options.max_half_width) {
    std::ostringstream msg;
    msg << "kernel stencil needs " << h << " cells per side, more than the configured "
        << options.max_half_width;
    throw Error(ErrorKind::HalfWidthOverflow, msg.str());
  }

  DiscreteKernel dk;
  dk.dx = dx;
  dk.half_width = h;
  dk.tail_mass = kernel.tail_mass(static_cast<double>(h) * dx);
  dk.weights.resize(2 * h + 1);
  for (std::size_t i = 0; i <= h; ++i) {
    const double w = dx * kernel.density(static_cast<double>(i) * dx);
    dk.weights[h + i] = w;
    dk.weights[h - i] = w;
  }
  dk.raw_sum = std::accumulate(dk.weights.begin(), dk.weights.end(), 0.0);
  if (!(dk.raw_sum > 0.0)) {
    throw Error(ErrorKind::NonNormalizable,
                "kernel sampled on this grid has zero mass; refine dx");
  }
  for (double& w : dk.weights) w /= dk.raw_sum;

  // Put the rounding residue on the center weight so the left-to-right sum
  // is exactly one.
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double sum = std::accumulate(dk.weights.begin(), dk.weights.end(), 0.0);
    if (sum == 1.0) break;
    dk.weights[h] += 1.0 - sum;
  }
  return dk;
}

}  // namespace frontlab
