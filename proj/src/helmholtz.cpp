#include "helmscale/helmholtz.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "helmscale/error.hpp"

namespace helmscale {

namespace {

int coef_plane(const Field& coef, int k) { return coef.ns() == 1 ? 0 : k; }

}  // namespace

Coefficients make_coefficients(RankContext& ctx, const PlaneFunction& a_fn,
                               const PlaneFunction& b_fn) {
  const auto& blk = ctx.block();
  const auto& g = ctx.grid();
  Coefficients c{Field(blk.nx(), blk.ny(), 1, 0, WallRule::even),
                 Field(blk.nx(), blk.ny(), 1, 0, WallRule::even)};
  ctx.timed(Category::usr, [&] {
    for (int j = 0; j < blk.ny(); ++j)
      for (int i = 0; i < blk.nx(); ++i) {
        const double x = (blk.x.begin + i + 0.5) * g.hx();
        const double y = (blk.y.begin + j + 0.5) * g.hy();
        c.a(i, j, 0) = a_fn(x, y);
        c.b(i, j, 0) = b_fn(x, y);
      }
  });
  validate(c);
  Patch planar = ctx.patch();
  planar.ns = 1;
  exchange_halos(ctx, c.b, planar, Axes::xy);
  return c;
}

Coefficients default_coefficients(RankContext& ctx) {
  const double lx = ctx.grid().lx(), ly = ctx.grid().ly();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return make_coefficients(
      ctx, [=](double x, double) { return 1.0 + 0.5 * std::sin(two_pi * x / lx); },
      [=](double, double y) { return 1.0 + 0.5 * std::cos(two_pi * y / ly); });
}

Coefficients uniform_coefficients(RankContext& ctx, double a, double b) {
  return make_coefficients(ctx, [=](double, double) { return a; },
                           [=](double, double) { return b; });
}

void validate(const Coefficients& c) {
  for (int k = 0; k < c.a.ns(); ++k)
    for (int j = 0; j < c.a.ny(); ++j)
      for (int i = 0; i < c.a.nx(); ++i) {
        const double a = c.a(i, j, k);
        if (!(a >= 0.0) || !std::isfinite(a))
          throw ConfigError("coefficient a must be finite and >= 0, got " + std::to_string(a));
      }
  for (int k = 0; k < c.b.ns(); ++k)
    for (int j = 0; j < c.b.ny(); ++j)
      for (int i = 0; i < c.b.nx(); ++i) {
        const double b = c.b(i, j, k);
        if (!(b >= 0.0) || !std::isfinite(b))
          throw ConfigError("coefficient b must be finite and >= 0, got " + std::to_string(b));
        if (c.a.ns() == c.b.ns() && !(c.a(i, j, k) + b > 0.0))
          throw ConfigError("coefficients need a + b > 0");
      }
}

void check_operator_shapes(const Field& p, const Coefficients& c) {
  auto fits = [&](const Field& coef) {
    return coef.nx() == p.nx() && coef.ny() == p.ny() &&
           (coef.ns() == 1 || coef.ns() == p.ns());
  };
  if (!fits(c.a) || !fits(c.b))
    throw ShapeError("coefficient fields do not match the operand shape");
}

void apply_operator(const Field& p, const Coefficients& c, double hx, double hy, Field& q) {
  check_operator_shapes(p, c);
  if (!q.same_interior(p)) throw ShapeError("apply_operator: output shape mismatch");
  const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
  for (int k = 0; k < p.ns(); ++k) {
    const int kc = coef_plane(c.a, k), kb = coef_plane(c.b, k);
    for (int j = 0; j < p.ny(); ++j)
      for (int i = 0; i < p.nx(); ++i) {
        const double bc = c.b(i, j, kb);
        const double be = 0.5 * (c.b(i + 1, j, kb) + bc);
        const double bw = 0.5 * (c.b(i - 1, j, kb) + bc);
        const double bn = 0.5 * (c.b(i, j + 1, kb) + bc);
        const double bs = 0.5 * (c.b(i, j - 1, kb) + bc);
        const double pc = p(i, j, k);
        const double flux_x = be * (p(i + 1, j, k) - pc) - bw * (pc - p(i - 1, j, k));
        const double flux_y = bn * (p(i, j + 1, k) - pc) - bs * (pc - p(i, j - 1, k));
        q(i, j, k) = c.a(i, j, kc) * pc - flux_x * ix2 - flux_y * iy2;
      }
  }
}

Field apply_operator(const Field& p, const Coefficients& c, double hx, double hy) {
  Field q(p.nx(), p.ny(), p.ns());
  apply_operator(p, c, hx, hy, q);
  return q;
}

void residual(const Field& p, const Field& S, const Coefficients& c, double hx, double hy,
              Field& r) {
  if (!S.same_interior(p)) throw ShapeError("residual: source shape mismatch");
  apply_operator(p, c, hx, hy, r);
  for (int k = 0; k < p.ns(); ++k)
    for (int j = 0; j < p.ny(); ++j)
      for (int i = 0; i < p.nx(); ++i) r(i, j, k) = S(i, j, k) - r(i, j, k);
}

Field residual(const Field& p, const Field& S, const Coefficients& c, double hx, double hy) {
  Field r(p.nx(), p.ny(), p.ns());
  residual(p, S, c, hx, hy, r);
  return r;
}

double local_dot(const Field& u, const Field& v) {
  if (!u.same_interior(v)) throw ShapeError("dot: shape mismatch");
  double sum = 0.0;
  for (int k = 0; k < u.ns(); ++k)
    for (int j = 0; j < u.ny(); ++j)
      for (int i = 0; i < u.nx(); ++i) sum += u(i, j, k) * v(i, j, k);
  return sum;
}

std::vector<double> plane_dots(RankContext& ctx, const Field& u, const Field& v) {
  if (!u.same_interior(v)) throw ShapeError("dot: shape mismatch");
  std::vector<double> partial(static_cast<std::size_t>(ctx.grid().ns()), 0.0);
  const int s0 = ctx.block().s.begin;
  ctx.timed(Category::usr, [&] {
    for (int k = 0; k < u.ns(); ++k) {
      double sum = 0.0;
      for (int j = 0; j < u.ny(); ++j)
        for (int i = 0; i < u.nx(); ++i) sum += u(i, j, k) * v(i, j, k);
      partial[static_cast<std::size_t>(s0 + k)] = sum;
    }
  });
  return ctx.allreduce_sum(partial);
}

double norm2_global(RankContext& ctx, const Field& f) {
  const double local = ctx.timed(Category::usr, [&] { return local_dot(f, f); });
  return std::sqrt(ctx.allreduce_sum(local));
}

}  // namespace helmscale
