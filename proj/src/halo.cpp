#include <string>
#include <vector>

#include "helmscale/comm.hpp"
#include "helmscale/error.hpp"

namespace helmscale {

namespace {

enum Tag : int { kToXHi = 1, kToXLo, kToYHi, kToYLo, kToSHi, kToSLo };

double wall_sign(const Field& f) { return f.wall_rule() == WallRule::odd ? -1.0 : 1.0; }

void exchange_x(RankContext& ctx, Field& f, const Patch& patch) {
  const int nx = f.nx(), ny = f.ny(), ns = f.ns();
  const int lo = patch.neighbors[Side::x_lo], hi = patch.neighbors[Side::x_hi];
  const std::size_t n = static_cast<std::size_t>(ny) * ns;
  std::vector<double> out_hi(n), out_lo(n), in_lo(n), in_hi(n);

  auto pack = [&](int i, std::vector<double>& out) {
    std::size_t c = 0;
    for (int k = 0; k < ns; ++k)
      for (int j = 0; j < ny; ++j) out[c++] = f(i, j, k);
  };
  auto unpack = [&](int i, const std::vector<double>& in) {
    std::size_t c = 0;
    for (int k = 0; k < ns; ++k)
      for (int j = 0; j < ny; ++j) f(i, j, k) = in[c++];
  };
  auto wall = [&](int ghost, int inner) {
    const double s = wall_sign(f);
    for (int k = 0; k < ns; ++k)
      for (int j = 0; j < ny; ++j) f(ghost, j, k) = s * f(inner, j, k);
  };

  ctx.timed(Category::usr, [&] {
    pack(nx - 1, out_hi);
    pack(0, out_lo);
  });
  ctx.sendrecv_pair({out_hi, hi, in_lo, lo, kToXHi}, {out_lo, lo, in_hi, hi, kToXLo});
  ctx.timed(Category::usr, [&] {
    lo == kWall ? wall(-1, 0) : unpack(-1, in_lo);
    hi == kWall ? wall(nx, nx - 1) : unpack(nx, in_hi);
  });
}

void exchange_y(RankContext& ctx, Field& f, const Patch& patch) {
  const int nx = f.nx(), ny = f.ny(), ns = f.ns();
  const int lo = patch.neighbors[Side::y_lo], hi = patch.neighbors[Side::y_hi];
  const std::size_t n = static_cast<std::size_t>(nx + 2) * ns;
  std::vector<double> out_hi(n), out_lo(n), in_lo(n), in_hi(n);

  auto pack = [&](int j, std::vector<double>& out) {
    std::size_t c = 0;
    for (int k = 0; k < ns; ++k)
      for (int i = -1; i <= nx; ++i) out[c++] = f(i, j, k);
  };
  auto unpack = [&](int j, const std::vector<double>& in) {
    std::size_t c = 0;
    for (int k = 0; k < ns; ++k)
      for (int i = -1; i <= nx; ++i) f(i, j, k) = in[c++];
  };

  ctx.timed(Category::usr, [&] {
    pack(ny - 1, out_hi);
    pack(0, out_lo);
  });
  ctx.sendrecv_pair({out_hi, hi, in_lo, lo, kToYHi}, {out_lo, lo, in_hi, hi, kToYLo});
  ctx.timed(Category::usr, [&] {
    unpack(-1, in_lo);
    unpack(ny, in_hi);
  });
}

void exchange_s(RankContext& ctx, Field& f, const Patch& patch) {
  if (f.s_halo() != 1) throw ShapeError("s-direction exchange needs a field with an s halo");
  const int nx = f.nx(), ny = f.ny(), ns = f.ns();
  const int lo = patch.neighbors[Side::s_lo], hi = patch.neighbors[Side::s_hi];
  const std::size_t n = static_cast<std::size_t>(nx + 2) * (ny + 2);
  std::vector<double> out_hi(n), out_lo(n), in_lo(n), in_hi(n);

  auto pack = [&](int k, std::vector<double>& out) {
    std::size_t c = 0;
    for (int j = -1; j <= ny; ++j)
      for (int i = -1; i <= nx; ++i) out[c++] = f(i, j, k);
  };
  auto unpack = [&](int k, const std::vector<double>& in) {
    std::size_t c = 0;
    for (int j = -1; j <= ny; ++j)
      for (int i = -1; i <= nx; ++i) f(i, j, k) = in[c++];
  };

  ctx.timed(Category::usr, [&] {
    pack(ns - 1, out_hi);
    pack(0, out_lo);
  });
  ctx.sendrecv_pair({out_hi, hi, in_lo, lo, kToSHi}, {out_lo, lo, in_hi, hi, kToSLo});
  ctx.timed(Category::usr, [&] {
    unpack(-1, in_lo);
    unpack(ns, in_hi);
  });
}

}  // namespace

void exchange_halos(RankContext& ctx, Field& f, const Patch& patch, Axes axes) {
  if (!patch.active) return;
  if (f.nx() != patch.nx || f.ny() != patch.ny || f.ns() != patch.ns)
    throw ShapeError("exchange_halos: field interior " + std::to_string(f.nx()) + "x" +
                     std::to_string(f.ny()) + "x" + std::to_string(f.ns()) +
                     " does not match block " + std::to_string(patch.nx) + "x" +
                     std::to_string(patch.ny) + "x" + std::to_string(patch.ns));
  ctx.timed(Category::com, [&] {
    if (has(axes, Axes::x)) exchange_x(ctx, f, patch);
    if (has(axes, Axes::y)) exchange_y(ctx, f, patch);
    if (has(axes, Axes::s)) exchange_s(ctx, f, patch);
  });
}

void exchange_halos(RankContext& ctx, Field& f, Axes axes) {
  exchange_halos(ctx, f, ctx.patch(), axes);
}

}  // namespace helmscale
