#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace helmscale {

enum class Boundary { dirichlet, periodic };

/// Global cell counts and extents. y and s are always periodic; x is
/// Dirichlet-zero by default and periodic only for test grids.
class GlobalGrid {
public:
  GlobalGrid(int nx, int ny, int ns, double lx = 1.0, double ly = 1.0,
             Boundary bc_x = Boundary::dirichlet);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int ns() const noexcept { return ns_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  double hx() const noexcept { return lx_ / nx_; }
  double hy() const noexcept { return ly_ / ny_; }
  Boundary bc_x() const noexcept { return bc_x_; }
  bool periodic_x() const noexcept { return bc_x_ == Boundary::periodic; }
  std::int64_t points() const noexcept {
    return static_cast<std::int64_t>(nx_) * ny_ * ns_;
  }

  friend bool operator==(const GlobalGrid&, const GlobalGrid&) = default;

private:
  int nx_, ny_, ns_;
  double lx_, ly_;
  Boundary bc_x_;
};

bool is_power_of_two(std::int64_t v) noexcept;

enum class Tokamak { small, medium, large };
enum class Strip { thin, medium, thick };

struct CaseSpec {
  Tokamak tokamak = Tokamak::small;
  Strip strip = Strip::thin;

  std::string name() const;
  static CaseSpec parse(std::string_view name);

  friend bool operator==(const CaseSpec&, const CaseSpec&) = default;
};

/// The nine cases ordered small-thin, small-medium, ..., large-thick.
const std::array<CaseSpec, 9>& all_cases();

/// Grid of a case: 64*2^t*2^w x 4096*2^t x 16*2^t, with square cells
/// (lx = 1, ly = ny/nx).
GlobalGrid case_grid(const CaseSpec& spec);

struct PerCore {
  int cx = 64;
  int cy = 128;
  int cs = 1;

  friend bool operator==(const PerCore&, const PerCore&) = default;
};

struct Decomposition {
  int px = 1;
  int py = 1;
  int ps = 1;

  int total() const noexcept { return px * py * ps; }
  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// Checks positivity and divisibility of the grid by the rank counts.
Decomposition make_decomposition(const GlobalGrid& grid, int px, int py, int ps);
Decomposition default_decomposition(const GlobalGrid& grid, PerCore per_core = {});

struct IndexRange {
  int begin = 0;
  int end = 0;
  int size() const noexcept { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Neighbour slots; kWall marks the Dirichlet boundary in x.
enum class Side { x_lo = 0, x_hi, y_lo, y_hi, s_lo, s_hi };
inline constexpr int kWall = -1;

struct Neighbors {
  std::array<int, 6> ids{kWall, kWall, kWall, kWall, kWall, kWall};
  int operator[](Side s) const noexcept { return ids[static_cast<int>(s)]; }
  int& operator[](Side s) noexcept { return ids[static_cast<int>(s)]; }
};

struct LocalBlock {
  int rank = 0;
  int ix = 0, iy = 0, is = 0;
  IndexRange x, y, s;
  Neighbors neighbors;

  int nx() const noexcept { return x.size(); }
  int ny() const noexcept { return y.size(); }
  int ns() const noexcept { return s.size(); }
};

int rank_of(const Decomposition& d, int ix, int iy, int is) noexcept;
LocalBlock local_block(const GlobalGrid& grid, const Decomposition& decomp, int rank);

}  // namespace helmscale
