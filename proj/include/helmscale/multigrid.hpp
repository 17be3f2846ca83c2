#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "helmscale/comm.hpp"
#include "helmscale/field.hpp"
#include "helmscale/helmholtz.hpp"
#include "helmscale/solvers.hpp"

namespace helmscale {

enum class CycleScheme { v, u };

/// Global description of one multigrid level. With fewer points than ranks
/// in a direction (stride > 1) coarse point J lives on rank J * stride, the
/// lowest-coordinate rank of the group that owns its fine descendants;
/// the other ranks of the group are passive on that level.
struct LevelInfo {
  int nx = 0, ny = 0;
  int stride_x = 1, stride_y = 1;
  double hx = 0.0, hy = 0.0;
};

struct LevelSchedule {
  CycleScheme scheme = CycleScheme::v;
  Boundary bc_x = Boundary::dirichlet;
  Decomposition decomp;
  std::vector<LevelInfo> levels;

  int size() const noexcept { return static_cast<int>(levels.size()); }
  /// This rank's patch on `level`.
  Patch patch(int level, const LocalBlock& block) const;
};

/// Halves both directions per level. V stops when the shorter global
/// direction has 2 points; U also stops once each rank has 2 points in x.
LevelSchedule coarsen_schedule(const GlobalGrid& grid, const Decomposition& decomp,
                               CycleScheme scheme);

/// Full-weighting restriction fine -> coarse. Periodic directions use the
/// 1/4-1/2-1/4 stencil on the coarse point 2J; a Dirichlet x direction uses
/// the cell-centred (1,3,3,1)/8 stencil so coarse walls stay on the fine
/// walls. Exchanges the halos of `fine` itself. Planes with mask 0 skipped.
void restrict_to(RankContext& ctx, Field& fine, const Patch& fine_patch, Field& coarse,
                 const Patch& coarse_patch, Boundary bc_x, std::span<const char> mask = {});
Field restrict_field(RankContext& ctx, Field& fine, const Patch& fine_patch,
                     const Patch& coarse_patch, Boundary bc_x);

/// Bilinear interpolation coarse -> fine (the transpose of restrict_to up to
/// a factor 4), added into `fine`. Exchanges the halos of `coarse` itself.
void prolong_add(RankContext& ctx, Field& coarse, const Patch& coarse_patch, Field& fine,
                 const Patch& fine_patch, Boundary bc_x, std::span<const char> mask = {});
Field prolong_field(RankContext& ctx, Field& coarse, const Patch& coarse_patch,
                    const Patch& fine_patch, Boundary bc_x);

/// Red-black Gauss-Seidel with colours by global (i + j) parity, one halo
/// exchange per colour. Wall ghosts of Dirichlet x faces are folded into
/// the diagonal so each point update is an exact Gauss-Seidel step.
void smooth(RankContext& ctx, Field& p, const Field& S, const Coefficients& c,
            const Patch& patch, double hx, double hy, int sweeps,
            std::span<const char> mask = {});

/// Injects coefficients onto the next coarser level (a_c(J,K) = a_f(2J,2K))
/// and exchanges the coarse b halos.
Coefficients coarsen_coefficients(RankContext& ctx, const Coefficients& fine,
                                  const Patch& fine_patch, const Patch& coarse_patch);

class MultigridSolver {
public:
  MultigridSolver(RankContext& ctx, const Coefficients& coeff, const SolverConfig& cfg);

  SolveResult solve(RankContext& ctx, const Field& S);
  const LevelSchedule& schedule() const noexcept { return schedule_; }

private:
  struct Level {
    Patch patch;
    double hx = 0.0, hy = 0.0;
    Coefficients coeff;
    Field u, f, r;
  };

  void cycle(RankContext& ctx, int l, std::span<const char> mask);

  SolverConfig cfg_;
  LevelSchedule schedule_;
  std::vector<Level> levels_;
  std::vector<std::int64_t> sweeps_;
};

SolveResult solve_mg(RankContext& ctx, const Field& S, const Coefficients& c,
                     const SolverConfig& cfg);

}  // namespace helmscale
