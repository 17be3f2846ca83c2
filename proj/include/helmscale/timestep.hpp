#pragma once

#include <cstdint>

#include "helmscale/comm.hpp"
#include "helmscale/field.hpp"
#include "helmscale/helmholtz.hpp"
#include "helmscale/solvers.hpp"

namespace helmscale {

/// splitmix64: state += 0x9E3779B97F4A7C15, then the standard mix.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;

  /// The (index + 1)-th output of a generator seeded with `seed`.
  static std::uint64_t at(std::uint64_t seed, std::uint64_t index) noexcept;

private:
  std::uint64_t state_;
};

/// Top 53 bits mapped onto [-1, 1).
double signed_unit(std::uint64_t bits) noexcept;

inline constexpr std::uint64_t kDefaultSeed = 1234567;

/// Surrogate moment system: one scalar advected by the potential in each
/// xy-plane and diffused along s.
struct State {
  Field f;    // s halo of 1
  Field phi;  // solver output
  double dt = 0.0;
  double kappa = 1.0;
  std::int64_t step = 0;
};

/// Arakawa's Jacobian: the mean of the three second-order nine-point forms,
/// approximating phi_x f_y - phi_y f_x. Needs fresh x/y halos (corners too).
void bracket(const Field& phi, const Field& f, double hx, double hy, Field& J);
Field bracket(const Field& phi, const Field& f, double hx, double hy);

/// dt <= 0 selects 0.01 * min(hx, hy). f at global point (gx, gy, gs) is
/// signed_unit(SplitMix64::at(seed, gx + nx * (gy + ny * gs))); phi = 0.
State initial_state(RankContext& ctx, std::uint64_t seed = kDefaultSeed, double dt = 0.0,
                    double kappa = 1.0);

/// f += dt * (J(phi, f) + kappa * (f[s+1] - 2 f + f[s-1])), then phi solves
/// with S = f. The advection half runs under Phase::step.
SolveStats step(RankContext& ctx, State& state, FieldSolver& solver);
SolveStats step(RankContext& ctx, State& state, const Coefficients& coeff,
                const SolverConfig& cfg);

}  // namespace helmscale
