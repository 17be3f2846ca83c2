#include <doctest.h>

#include <set>
#include <vector>

#include "helmscale/error.hpp"
#include "helmscale/grid.hpp"

using namespace helmscale;

TEST_CASE("grid rejects non powers of two and tiny extents") {
  CHECK_THROWS_AS(GlobalGrid(48, 64, 4), GridError);
  CHECK_THROWS_AS(GlobalGrid(64, 64, 3), GridError);
  CHECK_THROWS_AS(GlobalGrid(1, 64, 1), GridError);
  CHECK_THROWS_AS(GlobalGrid(64, 0, 1), GridError);
  CHECK_NOTHROW(GlobalGrid(2, 2, 1));
  const GlobalGrid g(64, 128, 4, 1.0, 2.0);
  CHECK(g.hx() == doctest::Approx(1.0 / 64));
  CHECK(g.hy() == doctest::Approx(2.0 / 128));
  CHECK(g.points() == 64 * 128 * 4);
}

TEST_CASE("case grids") {
  auto dims = [](const char* name) {
    const GlobalGrid g = case_grid(CaseSpec::parse(name));
    return std::vector<int>{g.nx(), g.ny(), g.ns()};
  };
  CHECK(dims("small-thin") == std::vector<int>{64, 4096, 16});
  CHECK(dims("medium-thin") == std::vector<int>{128, 8192, 32});
  CHECK(dims("large-thick") == std::vector<int>{1024, 16384, 64});
  CHECK(case_grid(CaseSpec::parse("small-thin")).ly() == doctest::Approx(64.0));
}

TEST_CASE("case names round trip and bad names fail") {
  for (const CaseSpec& c : all_cases()) CHECK(CaseSpec::parse(c.name()) == c);
  CHECK(all_cases().front().name() == "small-thin");
  CHECK(all_cases().back().name() == "large-thick");
  CHECK_THROWS_AS(CaseSpec::parse("huge-thin"), ConfigError);
  CHECK_THROWS_AS(CaseSpec::parse("small"), ConfigError);
}

TEST_CASE("default decompositions") {
  auto d = default_decomposition(case_grid(CaseSpec::parse("small-thin")));
  CHECK(d == Decomposition{1, 32, 16});
  CHECK(d.total() == 512);
  d = default_decomposition(case_grid(CaseSpec::parse("large-thick")));
  CHECK(d == Decomposition{16, 128, 64});
  CHECK(d.total() == 131072);
  CHECK(default_decomposition(GlobalGrid(64, 128, 1)).total() == 1);
  CHECK_THROWS_AS(default_decomposition(GlobalGrid(32, 128, 1)), DecompositionError);
  CHECK_THROWS_AS(default_decomposition(GlobalGrid(64, 128, 4), {64, 128, 8}),
                  DecompositionError);
  CHECK_THROWS_AS(make_decomposition(GlobalGrid(8, 8, 1), 3, 1, 1), DecompositionError);
  CHECK_THROWS_AS(make_decomposition(GlobalGrid(8, 8, 1), 0, 1, 1), DecompositionError);
}

TEST_CASE("core counts over the matrix are the doubling sequence") {
  std::vector<int> cores;
  for (const CaseSpec& c : all_cases()) cores.push_back(default_decomposition(case_grid(c)).total());
  CHECK(cores ==
        std::vector<int>{512, 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072});
}

TEST_CASE("local block of small-thin ranks") {
  const GlobalGrid g = case_grid(CaseSpec::parse("small-thin"));
  const Decomposition d{1, 32, 16};
  const LocalBlock b0 = local_block(g, d, 0);
  CHECK(b0.x == IndexRange{0, 64});
  CHECK(b0.y == IndexRange{0, 128});
  CHECK(b0.s == IndexRange{0, 1});

  // Invert the linearization by enumerating all coordinates.
  int found = -1;
  for (int is = 0; is < d.ps; ++is)
    for (int iy = 0; iy < d.py; ++iy)
      for (int ix = 0; ix < d.px; ++ix)
        if (ix + d.px * (iy + d.py * is) == 33) found = ix * 10000 + iy * 100 + is;
  CHECK(found == 0 * 10000 + 1 * 100 + 1);
  const LocalBlock b = local_block(g, d, 33);
  CHECK(b.ix == 0);
  CHECK(b.iy == 1);
  CHECK(b.is == 1);
  CHECK(b.y == IndexRange{128, 256});
  CHECK(b.s == IndexRange{1, 2});
  CHECK_THROWS_AS(local_block(g, d, 512), RankError);
  CHECK_THROWS_AS(local_block(g, d, -1), RankError);
}

TEST_CASE("blocks tile the grid exactly once") {
  const std::vector<std::pair<GlobalGrid, Decomposition>> cases = {
      {GlobalGrid(16, 32, 8), {2, 4, 2}},
      {GlobalGrid(64, 64, 16), {4, 8, 16}},
      {GlobalGrid(64, 64, 64), {8, 8, 64}},  // 4096 ranks
      {GlobalGrid(8, 8, 1), {1, 1, 1}},
  };
  for (const auto& [g, d] : cases) {
    std::vector<int> owner(static_cast<std::size_t>(g.points()), -1);
    for (int r = 0; r < d.total(); ++r) {
      const LocalBlock b = local_block(g, d, r);
      CHECK(b.nx() == g.nx() / d.px);
      for (int k = b.s.begin; k < b.s.end; ++k)
        for (int j = b.y.begin; j < b.y.end; ++j)
          for (int i = b.x.begin; i < b.x.end; ++i) {
            auto& o = owner[static_cast<std::size_t>(i + g.nx() * (j + g.ny() * k))];
            REQUIRE(o == -1);
            o = r;
          }
    }
    for (int o : owner) REQUIRE(o >= 0);
  }
}

TEST_CASE("neighbour relations are symmetric and walls sit on the x faces") {
  for (Boundary bc : {Boundary::dirichlet, Boundary::periodic}) {
    const GlobalGrid g(16, 16, 8, 1.0, 1.0, bc);
    const Decomposition d{4, 2, 4};
    auto opposite = [](Side s) { return static_cast<Side>(static_cast<int>(s) ^ 1); };
    for (int r = 0; r < d.total(); ++r) {
      const LocalBlock b = local_block(g, d, r);
      for (int s = 0; s < 6; ++s) {
        const Side side = static_cast<Side>(s);
        const int n = b.neighbors[side];
        if (n == kWall) {
          CHECK(bc == Boundary::dirichlet);
          CHECK(((side == Side::x_lo && b.ix == 0) || (side == Side::x_hi && b.ix == d.px - 1)));
          continue;
        }
        CHECK(local_block(g, d, n).neighbors[opposite(side)] == r);
      }
    }
  }
  const GlobalGrid g(16, 16, 8);
  const LocalBlock last = local_block(g, {4, 2, 4}, rank_of({4, 2, 4}, 3, 1, 3));
  CHECK(last.neighbors[Side::x_hi] == kWall);
  CHECK(last.neighbors[Side::y_hi] == rank_of({4, 2, 4}, 3, 0, 3));
  CHECK(last.neighbors[Side::s_hi] == rank_of({4, 2, 4}, 3, 1, 0));
}
