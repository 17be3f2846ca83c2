#include "helmscale/solvers.hpp"

#include <cmath>
#include <string>

#include "helmscale/error.hpp"
#include "helmscale/multigrid.hpp"

namespace helmscale {

std::string_view to_string(SolverKind k) noexcept {
  switch (k) {
    case SolverKind::dummy: return "dummy";
    case SolverKind::cg: return "cg";
    case SolverKind::mgv: return "mgv";
    case SolverKind::mgu: return "mgu";
  }
  return "?";
}

SolverKind parse_solver_kind(std::string_view name) {
  for (SolverKind k : {SolverKind::dummy, SolverKind::cg, SolverKind::mgv, SolverKind::mgu})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown solver '" + std::string(name) + "' (dummy, cg, mgv, mgu)");
}

int SolverConfig::iteration_limit() const noexcept {
  if (max_iter > 0) return max_iter;
  return kind == SolverKind::cg ? 10000 : 50;
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("solver tolerance must be > 0");
  if (max_iter < 0) throw ConfigError("max_iter must be >= 0");
  if (pre_sweeps < 1 || post_sweeps < 1 || coarse_sweeps < 1)
    throw ConfigError("sweep counts must be >= 1");
  if (kind == SolverKind::dummy && dummy_scalar == 0.0)
    throw ConfigError("dummy solver needs A != 0");
}

Field solve_dummy(const Field& S, double A) {
  if (A == 0.0) throw ConfigError("dummy solver needs A != 0");
  Field p(S.nx(), S.ny(), S.ns());
  for (int k = 0; k < S.ns(); ++k)
    for (int j = 0; j < S.ny(); ++j)
      for (int i = 0; i < S.nx(); ++i) p(i, j, k) = S(i, j, k) / A;
  return p;
}

SolveResult solve_cg(RankContext& ctx, const Field& S, const Coefficients& c,
                     const SolverConfig& cfg) {
  cfg.validate();
  check_operator_shapes(S, c);
  auto phase = ctx.enter(Phase::solver);
  const PhaseCounters before = ctx.timer().counters(Phase::solver);
  const int nx = S.nx(), ny = S.ny(), ns = S.ns();
  const int s0 = ctx.block().s.begin;
  const double hx = ctx.grid().hx(), hy = ctx.grid().hy();

  SolveResult out{Field(nx, ny, ns), {}};
  ctx.timed(Category::com, [&] {
    Field& x = out.p;
    Field r(nx, ny, ns), d(nx, ny, ns), q(nx, ny, ns);
    ctx.timed(Category::usr, [&] {
      r.copy_interior(S);
      d.copy_interior(S);
    });
    const std::vector<double> ss = plane_dots(ctx, S, S);
    std::vector<double> rr = plane_dots(ctx, r, r);

    const std::size_t np = ss.size();
    std::vector<char> live(np, 0);
    std::vector<double> rel(np, 0.0);
    auto refresh = [&] {
      bool any = false;
      for (std::size_t g = 0; g < np; ++g) {
        if (!live[g]) continue;
        rel[g] = std::sqrt(rr[g] / ss[g]);
        if (rel[g] <= cfg.tol) live[g] = 0;
        any = any || live[g];
      }
      return any;
    };
    for (std::size_t g = 0; g < np; ++g) live[g] = ss[g] > 0.0;

    const int limit = cfg.iteration_limit();
    int it = 0;
    bool running = refresh();
    while (running && it < limit) {
      exchange_halos(ctx, d, Axes::xy);
      ctx.timed(Category::usr, [&] { apply_operator(d, c, hx, hy, q); });
      const std::vector<double> dq = plane_dots(ctx, d, q);
      ctx.timed(Category::usr, [&] {
        for (int k = 0; k < ns; ++k) {
          const std::size_t g = static_cast<std::size_t>(s0 + k);
          if (!live[g]) continue;
          if (!(dq[g] > 0.0))
            throw NumericalError("CG breakdown on plane " + std::to_string(g) +
                                 ": p.Ap = " + std::to_string(dq[g]));
          const double alpha = rr[g] / dq[g];
          for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
              x(i, j, k) += alpha * d(i, j, k);
              r(i, j, k) -= alpha * q(i, j, k);
            }
        }
      });
      std::vector<double> rr_new = plane_dots(ctx, r, r);
      ++it;
      // Planes live before the update take the new direction.
      const std::vector<char> was_live = live;
      std::vector<double> rr_old = rr;
      for (std::size_t g = 0; g < np; ++g)
        if (was_live[g]) rr[g] = rr_new[g];
      running = refresh();
      ctx.timed(Category::usr, [&] {
        for (int k = 0; k < ns; ++k) {
          const std::size_t g = static_cast<std::size_t>(s0 + k);
          if (!live[g]) continue;
          const double beta = rr[g] / rr_old[g];
          for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) d(i, j, k) = r(i, j, k) + beta * d(i, j, k);
        }
      });
    }

    out.stats.iterations = it;
    out.stats.converged = !running;
    double worst = 0.0;
    for (double v : rel) worst = std::max(worst, v);
    out.stats.residual = worst;
  });
  const PhaseCounters& after = ctx.timer().counters(Phase::solver);
  out.stats.n_allreduce = after.n_allreduce - before.n_allreduce;
  out.stats.n_sendrecv = after.n_sendrecv - before.n_sendrecv;
  return out;
}

FieldSolver::FieldSolver(RankContext& ctx, Coefficients coeff, const SolverConfig& cfg)
    : coeff_(std::move(coeff)), cfg_(cfg) {
  cfg_.validate();
  if (cfg_.kind == SolverKind::mgv || cfg_.kind == SolverKind::mgu)
    mg_ = std::make_unique<MultigridSolver>(ctx, coeff_, cfg_);
}

FieldSolver::~FieldSolver() = default;
FieldSolver::FieldSolver(FieldSolver&&) noexcept = default;
FieldSolver& FieldSolver::operator=(FieldSolver&&) noexcept = default;

SolveResult FieldSolver::solve(RankContext& ctx, const Field& S) {
  switch (cfg_.kind) {
    case SolverKind::dummy: {
      auto phase = ctx.enter(Phase::solver);
      SolveResult out;
      out.p = ctx.timed(Category::usr, [&] { return solve_dummy(S, cfg_.dummy_scalar); });
      return out;
    }
    case SolverKind::cg: return solve_cg(ctx, S, coeff_, cfg_);
    case SolverKind::mgv:
    case SolverKind::mgu: return mg_->solve(ctx, S);
  }
  throw ConfigError("unhandled solver kind");
}

}  // namespace helmscale
