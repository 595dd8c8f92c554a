#include "frontlab/grid.hpp"

#include <cmath>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {

Grid Grid::make(double half_extent, double dx) {
  if (!(half_extent > 0.0) || !(dx > 0.0) || !std::isfinite(half_extent)) {
    throw Error(ErrorKind::InvalidParam, "grid needs half_extent > 0 and dx > 0");
  }
  const double cells = half_extent / dx;
  const double rounded = std::round(cells);
  if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
    std::ostringstream msg;
    msg << "half_extent " << half_extent << " is not an integer multiple of dx " << dx;
    throw Error(ErrorKind::InvalidParam, msg.str());
  }
  Grid grid;
  grid.half_extent = half_extent;
  grid.dx = dx;
  grid.n = 2 * static_cast<std::size_t>(rounded) + 1;
  return grid;
}

}  // namespace frontlab
