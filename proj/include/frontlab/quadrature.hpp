#pragma once

#include <functional>

namespace frontlab {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 48;
};

/// Adaptive 10-point Gauss-Legendre quadrature on dyadically refined panels.
///
/// A panel is accepted once the single-panel estimate and the sum of its two
/// halves agree to within the panel's share of `abs_tol`. Throws
/// Error(QuadratureFailure) if a panel still disagrees at `max_depth`.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options = {});

}  // namespace frontlab
