#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "helmscale/comm.hpp"
#include "helmscale/field.hpp"
#include "helmscale/helmholtz.hpp"

namespace helmscale {

enum class SolverKind { dummy, cg, mgv, mgu };

std::string_view to_string(SolverKind k) noexcept;
SolverKind parse_solver_kind(std::string_view name);

struct SolverConfig {
  SolverKind kind = SolverKind::mgu;
  double tol = 1e-6;
  /// 0 selects the per-kind default (10000 CG iterations, 50 MG cycles).
  int max_iter = 0;
  int pre_sweeps = 2;
  int post_sweeps = 2;
  int coarse_sweeps = 8;
  double dummy_scalar = 1.0;

  int iteration_limit() const noexcept;
  /// Throws ConfigError on tol <= 0, sweep counts < 1 or A = 0 for dummy.
  void validate() const;
};

struct SolveStats {
  /// CG iterations or MG cycles (the loop count over all planes).
  int iterations = 0;
  /// Largest relative residual ||S - Ap|| / ||S|| over the s-planes.
  double residual = 0.0;
  bool converged = true;
  std::vector<std::int64_t> level_sweeps;
  std::uint64_t n_allreduce = 0;
  std::uint64_t n_sendrecv = 0;
};

struct SolveResult {
  Field p;
  SolveStats stats;
};

/// p = S / A pointwise; no communication at all.
Field solve_dummy(const Field& S, double A);

/// Unpreconditioned CG from p = 0, with independent scalars per s-plane.
/// Uses exactly 2 allreduce calls at setup and 2 per iteration.
SolveResult solve_cg(RankContext& ctx, const Field& S, const Coefficients& c,
                     const SolverConfig& cfg);

class MultigridSolver;

/// One of the four solver versions behind a common interface; built once
/// per run so multigrid setup is reused across time steps.
class FieldSolver {
public:
  FieldSolver(RankContext& ctx, Coefficients coeff, const SolverConfig& cfg);
  ~FieldSolver();
  FieldSolver(FieldSolver&&) noexcept;
  FieldSolver& operator=(FieldSolver&&) noexcept;

  SolveResult solve(RankContext& ctx, const Field& S);
  const SolverConfig& config() const noexcept { return cfg_; }
  const Coefficients& coefficients() const noexcept { return coeff_; }

private:
  Coefficients coeff_;
  SolverConfig cfg_;
  std::unique_ptr<MultigridSolver> mg_;
};

}  // namespace helmscale
