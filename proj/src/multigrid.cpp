#include <cmath>
#include <string>

#include "helmscale/error.hpp"
#include "helmscale/multigrid.hpp"

namespace helmscale {

MultigridSolver::MultigridSolver(RankContext& ctx, const Coefficients& coeff,
                                 const SolverConfig& cfg)
    : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.kind != SolverKind::mgv && cfg_.kind != SolverKind::mgu)
    throw ConfigError("multigrid solver needs kind mgv or mgu");
  check_operator_shapes(Field(ctx.block().nx(), ctx.block().ny(), 1), coeff);
  const CycleScheme scheme = cfg_.kind == SolverKind::mgv ? CycleScheme::v : CycleScheme::u;
  schedule_ = coarsen_schedule(ctx.grid(), ctx.decomp(), scheme);

  ctx.timed(Category::com, [&] {
    const int ns = ctx.block().ns();
    for (int l = 0; l < schedule_.size(); ++l) {
      Level lvl;
      lvl.patch = schedule_.patch(l, ctx.block());
      lvl.hx = schedule_.levels[static_cast<std::size_t>(l)].hx;
      lvl.hy = schedule_.levels[static_cast<std::size_t>(l)].hy;
      if (l == 0) lvl.coeff = coeff;
      else
        lvl.coeff = coarsen_coefficients(ctx, levels_.back().coeff, levels_.back().patch,
                                         lvl.patch);
      lvl.u = Field(lvl.patch.nx, lvl.patch.ny, ns);
      lvl.f = Field(lvl.patch.nx, lvl.patch.ny, ns);
      lvl.r = Field(lvl.patch.nx, lvl.patch.ny, ns);
      levels_.push_back(std::move(lvl));
    }
  });
  sweeps_.assign(levels_.size(), 0);
}

void MultigridSolver::cycle(RankContext& ctx, int l, std::span<const char> mask) {
  Level& L = levels_[static_cast<std::size_t>(l)];
  if (!L.patch.active) return;
  auto& count = sweeps_[static_cast<std::size_t>(l)];
  if (l + 1 == static_cast<int>(levels_.size())) {
    smooth(ctx, L.u, L.f, L.coeff, L.patch, L.hx, L.hy, cfg_.coarse_sweeps, mask);
    count += cfg_.coarse_sweeps;
    return;
  }
  smooth(ctx, L.u, L.f, L.coeff, L.patch, L.hx, L.hy, cfg_.pre_sweeps, mask);
  exchange_halos(ctx, L.u, L.patch, Axes::xy);
  ctx.timed(Category::usr, [&] { residual(L.u, L.f, L.coeff, L.hx, L.hy, L.r); });

  Level& C = levels_[static_cast<std::size_t>(l) + 1];
  restrict_to(ctx, L.r, L.patch, C.f, C.patch, schedule_.bc_x, mask);
  if (C.patch.active) ctx.timed(Category::usr, [&] { C.u.fill(0.0); });
  cycle(ctx, l + 1, mask);
  prolong_add(ctx, C.u, C.patch, L.u, L.patch, schedule_.bc_x, mask);

  smooth(ctx, L.u, L.f, L.coeff, L.patch, L.hx, L.hy, cfg_.post_sweeps, mask);
  count += cfg_.pre_sweeps + cfg_.post_sweeps;
}

SolveResult MultigridSolver::solve(RankContext& ctx, const Field& S) {
  Level& top = levels_.front();
  if (!S.same_interior(top.u)) throw ShapeError("multigrid: source shape mismatch");
  auto phase = ctx.enter(Phase::solver);
  const PhaseCounters before = ctx.timer().counters(Phase::solver);
  std::fill(sweeps_.begin(), sweeps_.end(), 0);
  const int ns = S.ns();
  const int s0 = ctx.block().s.begin;

  SolveResult out;
  ctx.timed(Category::com, [&] {
    ctx.timed(Category::usr, [&] {
      top.f.copy_interior(S);
      top.u.fill(0.0);
    });
    const std::vector<double> ss = plane_dots(ctx, S, S);
    const std::size_t np = ss.size();
    std::vector<char> live(np, 0);
    std::vector<double> rel(np, 0.0);
    for (std::size_t g = 0; g < np; ++g) live[g] = ss[g] > 0.0;
    std::vector<char> mask(static_cast<std::size_t>(ns), 0);
    auto any_live = [&] {
      bool any = false;
      for (int k = 0; k < ns; ++k) {
        mask[static_cast<std::size_t>(k)] = live[static_cast<std::size_t>(s0 + k)];
      }
      for (char v : live) any = any || v;
      return any;
    };

    const int limit = cfg_.iteration_limit();
    int it = 0;
    bool running = any_live();
    while (running && it < limit) {
      cycle(ctx, 0, mask);
      ++it;
      exchange_halos(ctx, top.u, top.patch, Axes::xy);
      ctx.timed(Category::usr, [&] { residual(top.u, top.f, top.coeff, top.hx, top.hy, top.r); });
      const std::vector<double> rr = plane_dots(ctx, top.r, top.r);
      for (std::size_t g = 0; g < np; ++g) {
        if (!live[g]) continue;
        rel[g] = std::sqrt(rr[g] / ss[g]);
        if (!std::isfinite(rel[g]) || rel[g] > 10.0)
          throw NumericalError("multigrid diverged on plane " + std::to_string(g) +
                               " after " + std::to_string(it) + " cycles (relative residual " +
                               std::to_string(rel[g]) + ")");
        if (rel[g] <= cfg_.tol) live[g] = 0;
      }
      running = any_live();
    }

    out.p = Field(S.nx(), S.ny(), ns);
    ctx.timed(Category::usr, [&] { out.p.copy_interior(top.u); });
    out.stats.iterations = it;
    out.stats.converged = !running;
    double worst = 0.0;
    for (double v : rel) worst = std::max(worst, v);
    out.stats.residual = worst;
    out.stats.level_sweeps = sweeps_;
  });
  const PhaseCounters& after = ctx.timer().counters(Phase::solver);
  out.stats.n_allreduce = after.n_allreduce - before.n_allreduce;
  out.stats.n_sendrecv = after.n_sendrecv - before.n_sendrecv;
  return out;
}

SolveResult solve_mg(RankContext& ctx, const Field& S, const Coefficients& c,
                     const SolverConfig& cfg) {
  MultigridSolver mg(ctx, c, cfg);
  return mg.solve(ctx, S);
}

}  // namespace helmscale
