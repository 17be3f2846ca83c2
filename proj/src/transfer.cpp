#include <string>

#include "helmscale/error.hpp"
#include "helmscale/multigrid.hpp"

namespace helmscale {

namespace {

// x weights of the two fine columns 2J and 2J+1 that feed coarse column J.
struct XWeights {
  // restriction: t(2J) = lo*r(2J-1) + c0*r(2J), t(2J+1) = c1*r(2J+1) + hi*r(2J+2)
  double lo, c0, c1, hi;
  // prolongation: e(2J) = p0*v(J) + pl*v(J-1), e(2J+1) = p1*v(J) + ph*v(J+1)
  double p0, pl, p1, ph;
};

XWeights x_weights(Boundary bc_x) {
  if (bc_x == Boundary::dirichlet)
    return {0.125, 0.375, 0.375, 0.125, 0.75, 0.25, 0.75, 0.25};
  return {0.25, 0.5, 0.25, 0.0, 1.0, 0.0, 0.5, 0.5};
}

bool on(std::span<const char> mask, int k) {
  return mask.empty() || mask[static_cast<std::size_t>(k)] != 0;
}

void check_pair(const Field& fine, const Patch& fp, const Field* coarse, const Patch& cp) {
  if (!fp.active) return;
  if (fine.nx() != fp.nx || fine.ny() != fp.ny || fine.ns() != fp.ns)
    throw ShapeError("transfer: fine field does not match its level");
  if ((fp.nx != 1 && fp.nx % 2) || (fp.ny != 1 && fp.ny % 2))
    throw ShapeError("transfer: odd fine extent " + std::to_string(fp.nx) + "x" +
                     std::to_string(fp.ny));
  if (!cp.active) return;
  if (coarse && (coarse->nx() != cp.nx || coarse->ny() != cp.ny || coarse->ns() != cp.ns))
    throw ShapeError("transfer: coarse field does not match its level");
  const int cx = 2 * cp.x0 - fp.x0, cy = 2 * cp.y0 - fp.y0;
  if (cx < 0 || cx >= fp.nx || cy < 0 || cy >= fp.ny || 2 * cp.nx > std::max(fp.nx, 2) ||
      2 * cp.ny > std::max(fp.ny, 2))
    throw ShapeError("transfer: coarse patch does not sit on its fine patch");
}

}  // namespace

void restrict_to(RankContext& ctx, Field& fine, const Patch& fp, Field& coarse,
                 const Patch& cp, Boundary bc_x, std::span<const char> mask) {
  if (!fp.active) return;
  check_pair(fine, fp, &coarse, cp);
  const XWeights w = x_weights(bc_x);
  ctx.timed(Category::com, [&] {
    exchange_halos(ctx, fine, fp, Axes::xy);

    Field t(fp.nx, fp.ny, fp.ns);
    ctx.timed(Category::usr, [&] {
      for (int k = 0; k < fp.ns; ++k) {
        if (!on(mask, k)) continue;
        for (int j = 0; j < fp.ny; ++j) {
          if ((fp.y0 + j) % 2) continue;
          for (int i = 0; i < fp.nx; ++i) {
            auto xs = [&](int jj) {
              return (fp.x0 + i) % 2 == 0 ? w.lo * fine(i - 1, jj, k) + w.c0 * fine(i, jj, k)
                                          : w.c1 * fine(i, jj, k) + w.hi * fine(i + 1, jj, k);
            };
            t(i, j, k) = 0.25 * xs(j - 1) + 0.5 * xs(j) + 0.25 * xs(j + 1);
          }
        }
      }
    });
    if (fp.nx == 1) exchange_halos(ctx, t, fp, Axes::x);

    if (!cp.active) return;
    ctx.timed(Category::usr, [&] {
      for (int k = 0; k < cp.ns; ++k) {
        if (!on(mask, k)) continue;
        for (int jc = 0; jc < cp.ny; ++jc) {
          const int jf = 2 * (cp.y0 + jc) - fp.y0;
          for (int ic = 0; ic < cp.nx; ++ic) {
            const int i_f = 2 * (cp.x0 + ic) - fp.x0;
            coarse(ic, jc, k) = t(i_f, jf, k) + t(i_f + 1, jf, k);
          }
        }
      }
    });
  });
}

Field restrict_field(RankContext& ctx, Field& fine, const Patch& fp, const Patch& cp,
                     Boundary bc_x) {
  Field coarse(cp.nx, cp.ny, cp.ns);
  restrict_to(ctx, fine, fp, coarse, cp, bc_x);
  return coarse;
}

void prolong_add(RankContext& ctx, Field& coarse, const Patch& cp, Field& fine,
                 const Patch& fp, Boundary bc_x, std::span<const char> mask) {
  if (!fp.active) return;
  check_pair(fine, fp, &coarse, cp);
  const XWeights w = x_weights(bc_x);
  const bool split = fp.nx == 1;
  ctx.timed(Category::com, [&] {
    exchange_halos(ctx, coarse, cp, Axes::xy);

    Field z(fp.nx, fp.ny, fp.ns);
    Field b_part;
    if (split) b_part = Field(fp.nx, fp.ny, fp.ns);
    if (cp.active) {
      ctx.timed(Category::usr, [&] {
        for (int k = 0; k < cp.ns; ++k) {
          if (!on(mask, k)) continue;
          for (int jc = 0; jc < cp.ny; ++jc) {
            const int jf = 2 * (cp.y0 + jc) - fp.y0;
            for (int ic = 0; ic < cp.nx; ++ic) {
              const int i_f = 2 * (cp.x0 + ic) - fp.x0;
              const double v = coarse(ic, jc, k);
              z(i_f, jf, k) = w.p0 * v + w.pl * coarse(ic - 1, jc, k);
              const double b = w.p1 * v + w.ph * coarse(ic + 1, jc, k);
              if (split) b_part(i_f, jf, k) = b;
              else z(i_f + 1, jf, k) = b;
            }
          }
        }
      });
    }
    if (split) {
      exchange_halos(ctx, b_part, fp, Axes::x);
      if (fp.x0 % 2)
        ctx.timed(Category::usr, [&] {
          for (int k = 0; k < fp.ns; ++k)
            for (int j = 0; j < fp.ny; ++j) z(0, j, k) = b_part(-1, j, k);
        });
    }
    exchange_halos(ctx, z, fp, Axes::y);

    ctx.timed(Category::usr, [&] {
      for (int k = 0; k < fp.ns; ++k) {
        if (!on(mask, k)) continue;
        for (int j = 0; j < fp.ny; ++j) {
          const bool even = (fp.y0 + j) % 2 == 0;
          for (int i = 0; i < fp.nx; ++i)
            fine(i, j, k) += even ? z(i, j, k) : 0.5 * (z(i, j - 1, k) + z(i, j + 1, k));
        }
      }
    });
  });
}

Field prolong_field(RankContext& ctx, Field& coarse, const Patch& cp, const Patch& fp,
                    Boundary bc_x) {
  Field fine(fp.nx, fp.ny, fp.ns);
  prolong_add(ctx, coarse, cp, fine, fp, bc_x);
  return fine;
}

Coefficients coarsen_coefficients(RankContext& ctx, const Coefficients& fine,
                                  const Patch& fp, const Patch& cp) {
  Coefficients c{Field(cp.nx, cp.ny, 1, 0, WallRule::even),
                 Field(cp.nx, cp.ny, 1, 0, WallRule::even)};
  if (!cp.active) return c;
  const int ka = 0, kb = 0;
  ctx.timed(Category::usr, [&] {
    for (int jc = 0; jc < cp.ny; ++jc)
      for (int ic = 0; ic < cp.nx; ++ic) {
        const int i_f = 2 * (cp.x0 + ic) - fp.x0, jf = 2 * (cp.y0 + jc) - fp.y0;
        c.a(ic, jc, 0) = fine.a(i_f, jf, ka);
        c.b(ic, jc, 0) = fine.b(i_f, jf, kb);
      }
  });
  Patch planar = cp;
  planar.ns = 1;
  exchange_halos(ctx, c.b, planar, Axes::xy);
  return c;
}

}  // namespace helmscale
