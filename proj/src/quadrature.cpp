#include "frontlab/quadrature.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <utility>

#include "frontlab/error.hpp"

namespace frontlab {
namespace {

constexpr std::array<std::pair<double, double>, 5> kGaussLegendre10 = {{
    {0.14887433898163122, 0.295524224714753},
    {0.4333953941292472, 0.2692667193099965},
    {0.6794095682990244, 0.219086362515982},
    {0.8650633666889845, 0.14945134915058036},
    {0.9739065285171717, 0.06667134430868807},
}};

double panel(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (const auto& [node, weight] : kGaussLegendre10) {
    sum += weight * (f(mid - half * node) + f(mid + half * node));
  }
  return sum * half;
}

double refine(const std::function<double(double)>& f, double a, double b,
              double whole, double tol, int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  const double halves = left + right;
  if (std::abs(halves - whole) <= tol) return halves;
  if (depth >= max_depth || !std::isfinite(halves)) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not reach tolerance on [" << a << ", " << b
        << "] (estimate " << halves << ", change " << std::abs(halves - whole)
        << ")";
    throw Error(ErrorKind::QuadratureFailure, msg.str());
  }
  return refine(f, a, mid, left, 0.5 * tol, depth + 1, max_depth) +
         refine(f, mid, b, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, options);
  return refine(f, a, b, panel(f, a, b), options.abs_tol, 0, options.max_depth);
}

}  // namespace frontlab
