#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "brt/geometry.hpp"

namespace brt {

/// Walks the half-line {o + t·d, t ≥ 0} through the lattice cells and calls
/// emit(cell_index, length) for every cell crossed, stopping at the grid's
/// bounding box.
///
/// The origin is given in lattice units: fx ∈ [0, L1], fy ∈ [0, L2], with
/// fx = c + 1/2 at the center of column c. Cell boundaries are measured as
/// integer offsets from the origin, so a trace from a pixel center depends
/// only on the relative position of each cell (the weights are exactly shift
/// invariant away from the border).
template <class Emit>
void trace_ray(const ImageGrid& grid, double fx, double fy, const Direction& d, Emit&& emit) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const long L1 = static_cast<long>(grid.L1);
  const long L2 = static_cast<long>(grid.L2);
  long ix = static_cast<long>(std::floor(fx));
  long iy = static_cast<long>(std::floor(fy));
  // On a cell boundary and heading toward the lower cell.
  if (d.ux < 0 && static_cast<double>(ix) == fx) --ix;
  if (d.uy < 0 && static_cast<double>(iy) == fy) --iy;
  if (ix < 0 || iy < 0 || ix >= L1 || iy >= L2) return;

  const int sx = d.ux > 0 ? 1 : (d.ux < 0 ? -1 : 0);
  const int sy = d.uy > 0 ? 1 : (d.uy < 0 ? -1 : 0);
  auto next_x = [&](long i) {
    if (sx == 0) return inf;
    const double b = static_cast<double>(sx > 0 ? i + 1 : i);
    return (b - fx) * grid.delta1 / d.ux;
  };
  auto next_y = [&](long j) {
    if (sy == 0) return inf;
    const double b = static_cast<double>(sy > 0 ? j + 1 : j);
    return (b - fy) * grid.delta2 / d.uy;
  };

  double t = 0.0;
  double tx = next_x(ix);
  double ty = next_y(iy);
  while (true) {
    const double tn = tx < ty ? tx : ty;
    if (tn == inf) return;
    if (tn > t)
      emit(static_cast<std::size_t>(iy) * grid.L1 + static_cast<std::size_t>(ix), tn - t);
    t = tn;
    if (tx <= tn) {
      ix += sx;
      if (ix < 0 || ix >= L1) return;
      tx = next_x(ix);
    }
    if (ty <= tn) {
      iy += sy;
      if (iy < 0 || iy >= L2) return;
      ty = next_y(iy);
    }
  }
}

}  // namespace brt
