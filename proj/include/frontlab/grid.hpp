#pragma once

#include <cstddef>

namespace frontlab {

/// Uniform grid on [-half_extent, half_extent] with an odd node count so that
/// x = 0 is a node. Node positions are computed as (i - center) * dx, which
/// makes them exactly antisymmetric about the center.
struct Grid {
  double half_extent = 0.0;
  double dx = 0.0;
  std::size_t n = 0;

  /// Throws Error(InvalidParam) unless half_extent / dx is (close to) an integer.
  static Grid make(double half_extent, double dx);

  std::size_t center() const noexcept { return (n - 1) / 2; }
  double x(std::size_t i) const noexcept {
    return (static_cast<double>(i) - static_cast<double>(center())) * dx;
  }
};

}  // namespace frontlab
