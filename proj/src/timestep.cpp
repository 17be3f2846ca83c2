#include "helmscale/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "helmscale/error.hpp"

namespace helmscale {

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::at(std::uint64_t seed, std::uint64_t index) noexcept {
  SplitMix64 g(seed + index * 0x9E3779B97F4A7C15ULL);
  return g.next();
}

double signed_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

void bracket(const Field& phi, const Field& f, double hx, double hy, Field& J) {
  if (!phi.same_interior(f) || !J.same_interior(f))
    throw ShapeError("bracket: operand shapes differ");
  const double scale = 1.0 / (12.0 * hx * hy);
  for (int k = 0; k < f.ns(); ++k)
    for (int j = 0; j < f.ny(); ++j)
      for (int i = 0; i < f.nx(); ++i) {
        auto p = [&](int di, int dj) { return phi(i + di, j + dj, k); };
        auto q = [&](int di, int dj) { return f(i + di, j + dj, k); };
        const double jpp = (p(1, 0) - p(-1, 0)) * (q(0, 1) - q(0, -1)) -
                           (p(0, 1) - p(0, -1)) * (q(1, 0) - q(-1, 0));
        const double jpx = p(1, 0) * (q(1, 1) - q(1, -1)) - p(-1, 0) * (q(-1, 1) - q(-1, -1)) -
                           p(0, 1) * (q(1, 1) - q(-1, 1)) + p(0, -1) * (q(1, -1) - q(-1, -1));
        const double jxp = q(0, 1) * (p(1, 1) - p(-1, 1)) - q(0, -1) * (p(1, -1) - p(-1, -1)) -
                           q(1, 0) * (p(1, 1) - p(1, -1)) + q(-1, 0) * (p(-1, 1) - p(-1, -1));
        J(i, j, k) = (jpp + jpx + jxp) * scale;
      }
}

Field bracket(const Field& phi, const Field& f, double hx, double hy) {
  Field J(f.nx(), f.ny(), f.ns());
  bracket(phi, f, hx, hy, J);
  return J;
}

State initial_state(RankContext& ctx, std::uint64_t seed, double dt, double kappa) {
  const auto& g = ctx.grid();
  const auto& b = ctx.block();
  State st;
  st.f = Field(b.nx(), b.ny(), b.ns(), 1);
  st.phi = Field(b.nx(), b.ny(), b.ns());
  st.dt = dt > 0.0 ? dt : 0.01 * std::min(g.hx(), g.hy());
  st.kappa = kappa;
  ctx.timed(Category::usr, [&] {
    const std::uint64_t nx = static_cast<std::uint64_t>(g.nx());
    const std::uint64_t ny = static_cast<std::uint64_t>(g.ny());
    for (int k = 0; k < b.ns(); ++k)
      for (int j = 0; j < b.ny(); ++j)
        for (int i = 0; i < b.nx(); ++i) {
          const std::uint64_t gx = static_cast<std::uint64_t>(b.x.begin + i);
          const std::uint64_t gy = static_cast<std::uint64_t>(b.y.begin + j);
          const std::uint64_t gs = static_cast<std::uint64_t>(b.s.begin + k);
          st.f(i, j, k) = signed_unit(SplitMix64::at(seed, gx + nx * (gy + ny * gs)));
        }
  });
  return st;
}

SolveStats step(RankContext& ctx, State& st, FieldSolver& solver) {
  const double hx = ctx.grid().hx(), hy = ctx.grid().hy();
  Field& f = st.f;
  ctx.timed(Category::com, [&] {
    auto phase = ctx.enter(Phase::step);
    exchange_halos(ctx, f, Axes::xys);
    exchange_halos(ctx, st.phi, Axes::xy);
    ctx.timed(Category::usr, [&] {
      Field J = bracket(st.phi, f, hx, hy);
      Field next(f.nx(), f.ny(), f.ns(), 1);
      bool finite = true;
      for (int k = 0; k < f.ns(); ++k)
        for (int j = 0; j < f.ny(); ++j)
          for (int i = 0; i < f.nx(); ++i) {
            const double diff = f(i, j, k + 1) - 2.0 * f(i, j, k) + f(i, j, k - 1);
            const double v = f(i, j, k) + st.dt * (J(i, j, k) + st.kappa * diff);
            finite = finite && std::isfinite(v);
            next(i, j, k) = v;
          }
      if (!finite)
        throw NumericalError("non-finite moment field at step " + std::to_string(st.step + 1));
      f = std::move(next);
    });
  });
  SolveResult res = solver.solve(ctx, f);
  st.phi = std::move(res.p);
  ++st.step;
  return res.stats;
}

SolveStats step(RankContext& ctx, State& st, const Coefficients& coeff,
                const SolverConfig& cfg) {
  FieldSolver solver(ctx, coeff, cfg);
  return step(ctx, st, solver);
}

}  // namespace helmscale
