#include <algorithm>

#include "helmscale/error.hpp"
#include "helmscale/multigrid.hpp"

namespace helmscale {

namespace {

// Local extent, offset and activity of one direction on a level with n
// global points over p ranks.
struct Axis {
  int n = 0, x0 = 0, stride = 1;
  bool active = true;
};

Axis axis_of(int global, int ranks, int coord) {
  Axis a;
  if (global >= ranks) {
    a.n = global / ranks;
    a.x0 = coord * a.n;
    a.stride = 1;
  } else {
    a.stride = ranks / global;
    a.active = coord % a.stride == 0;
    a.n = a.active ? 1 : 0;
    a.x0 = coord / a.stride;
  }
  return a;
}

int wrap(int v, int n) { return (v % n + n) % n; }

}  // namespace

LevelSchedule coarsen_schedule(const GlobalGrid& grid, const Decomposition& decomp,
                               CycleScheme scheme) {
  LevelSchedule out;
  out.scheme = scheme;
  out.bc_x = grid.bc_x();
  out.decomp = decomp;

  int nx = grid.nx(), ny = grid.ny();
  double hx = grid.hx(), hy = grid.hy();
  for (;;) {
    LevelInfo lvl;
    lvl.nx = nx;
    lvl.ny = ny;
    lvl.stride_x = nx >= decomp.px ? 1 : decomp.px / nx;
    lvl.stride_y = ny >= decomp.py ? 1 : decomp.py / ny;
    lvl.hx = hx;
    lvl.hy = hy;
    out.levels.push_back(lvl);

    if (std::min(nx, ny) <= 2) break;
    if (scheme == CycleScheme::u && nx / decomp.px <= 2) break;
    nx /= 2;
    ny /= 2;
    hx *= 2.0;
    hy *= 2.0;
  }
  return out;
}

Patch LevelSchedule::patch(int level, const LocalBlock& block) const {
  if (level < 0 || level >= size())
    throw ConfigError("multigrid level " + std::to_string(level) + " out of range");
  const LevelInfo& lvl = levels[static_cast<std::size_t>(level)];
  const Decomposition& d = decomp;
  const Axis ax = axis_of(lvl.nx, d.px, block.ix);
  const Axis ay = axis_of(lvl.ny, d.py, block.iy);

  Patch p;
  p.active = ax.active && ay.active;
  p.nx = ax.n;
  p.ny = ay.n;
  p.ns = block.ns();
  p.x0 = ax.x0;
  p.y0 = ay.x0;
  if (!p.active) {
    p.nx = p.ny = 0;
    return p;
  }

  const int sx = ax.stride, sy = ay.stride;
  if (bc_x == Boundary::periodic) {
    p.neighbors[Side::x_lo] = rank_of(d, wrap(block.ix - sx, d.px), block.iy, block.is);
    p.neighbors[Side::x_hi] = rank_of(d, wrap(block.ix + sx, d.px), block.iy, block.is);
  } else {
    p.neighbors[Side::x_lo] = block.ix - sx >= 0 ? rank_of(d, block.ix - sx, block.iy, block.is)
                                                 : kWall;
    p.neighbors[Side::x_hi] = block.ix + sx < d.px
                                  ? rank_of(d, block.ix + sx, block.iy, block.is)
                                  : kWall;
  }
  p.neighbors[Side::y_lo] = rank_of(d, block.ix, wrap(block.iy - sy, d.py), block.is);
  p.neighbors[Side::y_hi] = rank_of(d, block.ix, wrap(block.iy + sy, d.py), block.is);
  p.neighbors[Side::s_lo] = block.neighbors[Side::s_lo];
  p.neighbors[Side::s_hi] = block.neighbors[Side::s_hi];
  return p;
}

}  // namespace helmscale
