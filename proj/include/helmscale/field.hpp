#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace helmscale {

/// How a Dirichlet x-wall ghost is filled from the adjacent interior value:
/// odd (p_ghost = -p, zero on the wall face) for solution-like fields, even
/// (copy) for coefficients.
enum class WallRule { odd, even };

/// Rank-local 3-D block, x fastest. One-cell halos in x and y; the s halo
/// is 0 (solver fields) or 1 (advected moments).
class Field {
public:
  Field() = default;
  Field(int nx, int ny, int ns, int s_halo = 0, WallRule rule = WallRule::odd);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int ns() const noexcept { return ns_; }
  int s_halo() const noexcept { return hs_; }
  WallRule wall_rule() const noexcept { return rule_; }
  void set_wall_rule(WallRule r) noexcept { rule_ = r; }

  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i + 1) + sy_ * static_cast<std::size_t>(j + 1) +
           sk_ * static_cast<std::size_t>(k + hs_);
  }
  double& operator()(int i, int j, int k) noexcept { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const noexcept { return data_[index(i, j, k)]; }

  std::size_t stride_y() const noexcept { return sy_; }
  std::size_t stride_s() const noexcept { return sk_; }
  std::span<double> raw() noexcept { return data_; }
  std::span<const double> raw() const noexcept { return data_; }

  void fill(double v);
  /// Interior sizes agree (halo widths may differ).
  bool same_interior(const Field& o) const noexcept {
    return nx_ == o.nx_ && ny_ == o.ny_ && ns_ == o.ns_;
  }
  bool interior_finite() const noexcept;
  /// Copies interior values from a field with the same interior shape.
  void copy_interior(const Field& from);
  /// Interior values packed x fastest, then y, then s.
  std::vector<double> interior() const;

private:
  int nx_ = 0, ny_ = 0, ns_ = 0, hs_ = 0;
  WallRule rule_ = WallRule::odd;
  std::size_t sy_ = 0, sk_ = 0;
  std::vector<double> data_;
};

}  // namespace helmscale
