#include "helmscale/grid.hpp"

#include "helmscale/error.hpp"

namespace helmscale {

bool is_power_of_two(std::int64_t v) noexcept { return v > 0 && (v & (v - 1)) == 0; }

GlobalGrid::GlobalGrid(int nx, int ny, int ns, double lx, double ly, Boundary bc_x)
    : nx_(nx), ny_(ny), ns_(ns), lx_(lx), ly_(ly), bc_x_(bc_x) {
  if (nx < 2 || ny < 2 || ns < 1)
    throw GridError("grid " + std::to_string(nx) + "x" + std::to_string(ny) + "x" +
                    std::to_string(ns) + " needs nx >= 2, ny >= 2, ns >= 1");
  if (!is_power_of_two(nx) || !is_power_of_two(ny) || !is_power_of_two(ns))
    throw GridError("grid dimensions must be powers of two, got " + std::to_string(nx) + "x" +
                    std::to_string(ny) + "x" + std::to_string(ns));
  if (!(lx > 0.0) || !(ly > 0.0)) throw GridError("grid extents must be positive");
}

namespace {

constexpr std::string_view kTokamakNames[] = {"small", "medium", "large"};
constexpr std::string_view kStripNames[] = {"thin", "medium", "thick"};

}  // namespace

std::string CaseSpec::name() const {
  return std::string(kTokamakNames[static_cast<int>(tokamak)]) + "-" +
         std::string(kStripNames[static_cast<int>(strip)]);
}

CaseSpec CaseSpec::parse(std::string_view name) {
  for (const auto& c : all_cases())
    if (c.name() == name) return c;
  throw ConfigError("unknown case '" + std::string(name) +
                    "' (expected e.g. small-thin, medium-thick)");
}

const std::array<CaseSpec, 9>& all_cases() {
  static const std::array<CaseSpec, 9> cases = [] {
    std::array<CaseSpec, 9> out{};
    int n = 0;
    for (auto t : {Tokamak::small, Tokamak::medium, Tokamak::large})
      for (auto w : {Strip::thin, Strip::medium, Strip::thick}) out[n++] = CaseSpec{t, w};
    return out;
  }();
  return cases;
}

GlobalGrid case_grid(const CaseSpec& spec) {
  const int t = static_cast<int>(spec.tokamak);
  const int w = static_cast<int>(spec.strip);
  const int nx = 64 << (t + w);
  const int ny = 4096 << t;
  const int ns = 16 << t;
  return GlobalGrid(nx, ny, ns, 1.0, static_cast<double>(ny) / nx);
}

Decomposition make_decomposition(const GlobalGrid& grid, int px, int py, int ps) {
  if (px < 1 || py < 1 || ps < 1)
    throw DecompositionError("rank counts must be positive");
  if (grid.nx() % px != 0 || grid.ny() % py != 0 || grid.ns() % ps != 0)
    throw DecompositionError("decomposition " + std::to_string(px) + "x" + std::to_string(py) +
                             "x" + std::to_string(ps) + " does not divide grid " +
                             std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()) + "x" +
                             std::to_string(grid.ns()));
  return {px, py, ps};
}

Decomposition default_decomposition(const GlobalGrid& grid, PerCore pc) {
  if (pc.cx < 1 || pc.cy < 1 || pc.cs < 1 || grid.nx() % pc.cx != 0 ||
      grid.ny() % pc.cy != 0 || grid.ns() % pc.cs != 0)
    throw DecompositionError("per-core size " + std::to_string(pc.cx) + "x" +
                             std::to_string(pc.cy) + "x" + std::to_string(pc.cs) +
                             " does not divide the grid");
  return {grid.nx() / pc.cx, grid.ny() / pc.cy, grid.ns() / pc.cs};
}

int rank_of(const Decomposition& d, int ix, int iy, int is) noexcept {
  return ix + d.px * (iy + d.py * is);
}

LocalBlock local_block(const GlobalGrid& grid, const Decomposition& d, int rank) {
  if (rank < 0 || rank >= d.total())
    throw RankError("rank " + std::to_string(rank) + " outside [0, " +
                    std::to_string(d.total()) + ")");
  LocalBlock b;
  b.rank = rank;
  b.ix = rank % d.px;
  b.iy = (rank / d.px) % d.py;
  b.is = rank / (d.px * d.py);

  const int mx = grid.nx() / d.px, my = grid.ny() / d.py, ms = grid.ns() / d.ps;
  b.x = {b.ix * mx, (b.ix + 1) * mx};
  b.y = {b.iy * my, (b.iy + 1) * my};
  b.s = {b.is * ms, (b.is + 1) * ms};

  auto wrap = [](int v, int n) { return (v % n + n) % n; };
  if (grid.periodic_x()) {
    b.neighbors[Side::x_lo] = rank_of(d, wrap(b.ix - 1, d.px), b.iy, b.is);
    b.neighbors[Side::x_hi] = rank_of(d, wrap(b.ix + 1, d.px), b.iy, b.is);
  } else {
    b.neighbors[Side::x_lo] = b.ix > 0 ? rank_of(d, b.ix - 1, b.iy, b.is) : kWall;
    b.neighbors[Side::x_hi] = b.ix < d.px - 1 ? rank_of(d, b.ix + 1, b.iy, b.is) : kWall;
  }
  b.neighbors[Side::y_lo] = rank_of(d, b.ix, wrap(b.iy - 1, d.py), b.is);
  b.neighbors[Side::y_hi] = rank_of(d, b.ix, wrap(b.iy + 1, d.py), b.is);
  b.neighbors[Side::s_lo] = rank_of(d, b.ix, b.iy, wrap(b.is - 1, d.ps));
  b.neighbors[Side::s_hi] = rank_of(d, b.ix, b.iy, wrap(b.is + 1, d.ps));
  return b;
}

}  // namespace helmscale
