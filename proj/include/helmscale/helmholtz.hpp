#pragma once

#include <functional>
#include <vector>

#include "helmscale/comm.hpp"
#include "helmscale/field.hpp"

namespace helmscale {

/// Coefficients of (a - div b grad) p = S. Both are cell-centred; b carries
/// exchanged halos (even wall rule) so face values can be formed locally.
/// Fields with one plane apply to every s-plane.
struct Coefficients {
  Field a;
  Field b;
};

using PlaneFunction = std::function<double(double x, double y)>;

/// Evaluates a(x, y), b(x, y) at the cell centres of the rank's block and
/// exchanges the b halos. Throws ConfigError unless a, b >= 0 and a + b > 0.
Coefficients make_coefficients(RankContext& ctx, const PlaneFunction& a, const PlaneFunction& b);
/// a = 1 + sin(2 pi x / lx) / 2, b = 1 + cos(2 pi y / ly) / 2.
Coefficients default_coefficients(RankContext& ctx);
Coefficients uniform_coefficients(RankContext& ctx, double a, double b);
void validate(const Coefficients& c);

/// q = a p - div(b grad p) with the 5-point flux stencil and arithmetic
/// face means of b. Requires fresh x/y halos on p.
void apply_operator(const Field& p, const Coefficients& c, double hx, double hy, Field& q);
Field apply_operator(const Field& p, const Coefficients& c, double hx, double hy);

/// r = S - A p (same halo requirement as apply_operator).
void residual(const Field& p, const Field& S, const Coefficients& c, double hx, double hy,
              Field& r);
Field residual(const Field& p, const Field& S, const Coefficients& c, double hx, double hy);

/// Interior sum over the rank's block, no communication.
double local_dot(const Field& u, const Field& v);
/// Per global s-plane interior dot products, summed over all ranks.
std::vector<double> plane_dots(RankContext& ctx, const Field& u, const Field& v);
/// Square root of the global sum of squares over all interiors.
double norm2_global(RankContext& ctx, const Field& f);

void check_operator_shapes(const Field& p, const Coefficients& c);

}  // namespace helmscale
