#include "helmscale/error.hpp"
#include "helmscale/multigrid.hpp"

namespace helmscale {

void smooth(RankContext& ctx, Field& p, const Field& S, const Coefficients& c,
            const Patch& patch, double hx, double hy, int sweeps, std::span<const char> mask) {
  if (!patch.active) return;
  check_operator_shapes(p, c);
  if (!S.same_interior(p)) throw ShapeError("smooth: source shape mismatch");
  const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
  const bool wall_lo = patch.wall_lo_x(), wall_hi = patch.wall_hi_x();
  const int nx = p.nx(), ny = p.ny();
  const int ka = 0;
  const bool plane_coef = c.a.ns() != 1;

  auto colour = [&](int parity) {
    for (int k = 0; k < p.ns(); ++k) {
      if (!mask.empty() && !mask[static_cast<std::size_t>(k)]) continue;
      const int kc = plane_coef ? k : ka;
      for (int j = 0; j < ny; ++j) {
        const int start = ((patch.x0 + patch.y0 + j + parity) % 2 + 2) % 2;
        for (int i = start; i < nx; i += 2) {
          const double bc = c.b(i, j, kc);
          const double be = 0.5 * (c.b(i + 1, j, kc) + bc);
          const double bw = 0.5 * (c.b(i - 1, j, kc) + bc);
          const double bn = 0.5 * (c.b(i, j + 1, kc) + bc);
          const double bs = 0.5 * (c.b(i, j - 1, kc) + bc);
          double diag = c.a(i, j, kc) + (be + bw) * ix2 + (bn + bs) * iy2;
          double rhs = S(i, j, k) + (bn * p(i, j + 1, k) + bs * p(i, j - 1, k)) * iy2;
          if (wall_lo && i == 0) diag += bw * ix2;
          else rhs += bw * p(i - 1, j, k) * ix2;
          if (wall_hi && i == nx - 1) diag += be * ix2;
          else rhs += be * p(i + 1, j, k) * ix2;
          p(i, j, k) = rhs / diag;
        }
      }
    }
  };

  ctx.timed(Category::com, [&] {
    for (int s = 0; s < sweeps; ++s)
      for (int parity = 0; parity < 2; ++parity) {
        exchange_halos(ctx, p, patch, Axes::xy);
        ctx.timed(Category::usr, [&] { colour(parity); });
      }
  });
}

}  // namespace helmscale
