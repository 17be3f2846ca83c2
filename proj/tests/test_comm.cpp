#include <doctest.h>

#include <chrono>
#include <cstring>
#include <thread>

#include "helmscale/comm.hpp"
#include "helmscale/error.hpp"
#include "oracle.hpp"

using namespace helmscale;
using namespace std::chrono_literals;

namespace {

const GlobalGrid kGrid(8, 8, 4, 1.0, 1.0);

// Field value carrying the global index, so halos can be checked exactly.
double tag_of(const GlobalGrid& g, int i, int j, int k) {
  return i + 100.0 * j + 10000.0 * k + (g.periodic_x() ? 0.5 : 0.0);
}

void busy_for(std::chrono::microseconds d) {
  const auto until = std::chrono::steady_clock::now() + d;
  while (std::chrono::steady_clock::now() < until) {
  }
}

}  // namespace

TEST_CASE("single rank returns its value") {
  auto res = run_ranks(GlobalGrid(2, 2, 1), {1, 1, 1}, [](RankContext&) { return 42; });
  REQUIRE(res.values.size() == 1);
  CHECK(res.values[0] == 42);
}

TEST_CASE("results are ordered by rank") {
  auto res = run_ranks(kGrid, {2, 2, 2}, [](RankContext& ctx) { return ctx.rank() * 3; });
  for (int r = 0; r < 8; ++r) CHECK(res.values[static_cast<std::size_t>(r)] == 3 * r);
}

TEST_CASE("allreduce sums and is bitwise identical on every rank") {
  auto res = run_ranks(GlobalGrid(8, 8, 8), {2, 2, 2}, [](RankContext& ctx) {
    const double ones = ctx.allreduce_sum(1.0);
    const double series = ctx.allreduce_sum(static_cast<double>(ctx.rank()));
    return std::vector<double>{ones, series};
  });
  for (const auto& v : res.values) {
    CHECK(v[0] == 8.0);
    CHECK(v[1] == 28.0);
  }

  auto bits = run_ranks(GlobalGrid(8, 8, 4), {1, 1, 4}, [](RankContext& ctx) {
    const double contrib[] = {0.1, 0.2, 0.3, 0.4};
    return ctx.allreduce_sum(contrib[ctx.rank()]);
  });
  for (double v : bits.values) CHECK(std::memcmp(&v, &bits.values[0], sizeof v) == 0);
}

TEST_CASE("numeric results do not depend on the number of execution contexts") {
  auto program = [](RankContext& ctx) {
    std::vector<double> v = testing::random_values(5, 17u + static_cast<unsigned>(ctx.rank()));
    const std::vector<double> s = ctx.allreduce_sum(v);
    Field f(ctx.block().nx(), ctx.block().ny(), ctx.block().ns());
    for (int k = 0; k < f.ns(); ++k)
      for (int j = 0; j < f.ny(); ++j)
        for (int i = 0; i < f.nx(); ++i) f(i, j, k) = s[0] * (i + 1) + s[1] * ctx.rank();
    exchange_halos(ctx, f, Axes::xy);
    std::vector<double> raw(f.raw().begin(), f.raw().end());
    raw.insert(raw.end(), s.begin(), s.end());
    return raw;
  };
  const GlobalGrid g(32, 32, 4);
  const Decomposition d{4, 4, 4};
  ExecOptions few;
  few.workers = 8;
  ExecOptions all;
  all.workers = 0;
  auto a = run_ranks(g, d, program, few);
  auto b = run_ranks(g, d, program, all);
  CHECK(a.values == b.values);
}

TEST_CASE("mismatched collectives are protocol errors") {
  ExecOptions opts;
  opts.timeout = 2000ms;
  CHECK_THROWS_AS(run_ranks(GlobalGrid(4, 4, 2), {1, 1, 2},
                            [](RankContext& ctx) {
                              if (ctx.rank() == 0) ctx.allreduce_sum(1.0);
                            },
                            opts),
                  ProtocolError);
  CHECK_THROWS_AS(run_ranks(GlobalGrid(4, 4, 2), {1, 1, 2},
                            [](RankContext& ctx) {
                              std::vector<double> v(static_cast<std::size_t>(ctx.rank() + 1), 1.0);
                              ctx.allreduce_sum(v);
                            },
                            opts),
                  ProtocolError);
}

TEST_CASE("deadlock is detected by the timeout") {
  ExecOptions opts;
  opts.timeout = 300ms;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run_ranks(GlobalGrid(4, 4, 2), {1, 1, 2},
              [](RankContext& ctx) {
                std::vector<double> buf(1);
                ctx.recv(buf, 1 - ctx.rank(), 7);
              },
              opts);
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(e.rank().has_value());
    CHECK(std::string(e.what()).find("timed out") != std::string::npos);
  }
  CHECK(std::chrono::steady_clock::now() - t0 < 10s);
}

TEST_CASE("failing rank is named in the error") {
  try {
    run_ranks(kGrid, {2, 2, 1}, [](RankContext& ctx) {
      if (ctx.rank() == 2) throw NumericalError("boom");
      ctx.allreduce_sum(1.0);
    });
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.rank() == 2);
    CHECK(std::string(e.what()) == "rank 2: boom");
  }
}

TEST_CASE("halo exchange on one periodic rank wraps in y") {
  auto res = run_ranks(GlobalGrid(4, 4, 1), {1, 1, 1}, [](RankContext& ctx) {
    Field f(4, 4, 1);
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) f(i, j, 0) = i + 10 * j;
    exchange_halos(ctx, f, Axes::xy);
    for (int i = 0; i < 4; ++i) {
      CHECK(f(i, -1, 0) == f(i, 3, 0));
      CHECK(f(i, 4, 0) == f(i, 0, 0));
    }
    // Dirichlet walls in x use the odd reflection.
    for (int j = 0; j < 4; ++j) {
      CHECK(f(-1, j, 0) == -f(0, j, 0));
      CHECK(f(4, j, 0) == -f(3, j, 0));
    }
    Field c(4, 4, 1, 0, WallRule::even);
    c.fill(2.0);
    exchange_halos(ctx, c, Axes::x);
    CHECK(c(-1, 1, 0) == 2.0);
  });
}

TEST_CASE("halo values equal the neighbour's interior, corners included") {
  for (Boundary bc : {Boundary::dirichlet, Boundary::periodic}) {
    const GlobalGrid g(8, 8, 4, 1.0, 1.0, bc);
    for (Decomposition d : {Decomposition{2, 1, 1}, Decomposition{2, 2, 2}, Decomposition{4, 2, 4}}) {
      run_ranks(g, d, [&](RankContext& ctx) {
        const LocalBlock& b = ctx.block();
        Field f(b.nx(), b.ny(), b.ns(), 1);
        for (int k = 0; k < b.ns(); ++k)
          for (int j = 0; j < b.ny(); ++j)
            for (int i = 0; i < b.nx(); ++i)
              f(i, j, k) = tag_of(g, b.x.begin + i, b.y.begin + j, b.s.begin + k);
        exchange_halos(ctx, f, Axes::xys);
        // Reference from the global index function; x wall ghosts are -interior.
        for (int k = 0; k < b.ns(); ++k)
          for (int j = -1; j <= b.ny(); ++j)
            for (int i = -1; i <= b.nx(); ++i) {
              const int gi = b.x.begin + i, gj = (b.y.begin + j + g.ny()) % g.ny();
              const int gk = (b.s.begin + k + g.ns()) % g.ns();
              double want;
              if (gi < 0 && !g.periodic_x()) want = -tag_of(g, 0, gj, gk);
              else if (gi >= g.nx() && !g.periodic_x()) want = -tag_of(g, g.nx() - 1, gj, gk);
              else want = tag_of(g, (gi + g.nx()) % g.nx(), gj, gk);
              REQUIRE(f(i, j, k) == want);
            }
        for (int j = 0; j < b.ny(); ++j)
          for (int i = 0; i < b.nx(); ++i) {
            const int gi = b.x.begin + i, gj = b.y.begin + j;
            REQUIRE(f(i, j, -1) == tag_of(g, gi, gj, (b.s.begin - 1 + g.ns()) % g.ns()));
            REQUIRE(f(i, j, b.ns()) == tag_of(g, gi, gj, b.s.end % g.ns()));
          }
      });
    }
  }
}

TEST_CASE("exchange checks shapes") {
  CHECK_THROWS_AS(run_ranks(kGrid, {1, 1, 1},
                            [](RankContext& ctx) {
                              Field f(4, 8, 4);
                              exchange_halos(ctx, f, Axes::xy);
                            }),
                  ShapeError);
  CHECK_THROWS_AS(run_ranks(kGrid, {1, 1, 1},
                            [](RankContext& ctx) {
                              Field f(8, 8, 4);
                              exchange_halos(ctx, f, Axes::s);
                            }),
                  ShapeError);
}

TEST_CASE("pure exchange programs do no reductions and count their calls") {
  const GlobalGrid g(8, 8, 4);
  auto res = run_ranks(g, {2, 2, 2}, [](RankContext& ctx) {
    auto phase = ctx.enter(Phase::step);
    Field f(ctx.block().nx(), ctx.block().ny(), ctx.block().ns(), 1);
    exchange_halos(ctx, f, Axes::xys);
  });
  for (const auto& r : res.reports) {
    CHECK(r.n_allreduce() == 0);
    CHECK(r.t_allreduce() == 0.0);
    CHECK(r.phase(Phase::step).n_sendrecv == 6);
  }
  CHECK(res.merged.n_sendrecv() == 48);
  // Ranks on the x walls skip one half of each x call.
  const std::uint64_t x_face = 4 * 2 * 8;       // ny * ns doubles per x message, bytes
  const std::uint64_t y_face = 6 * 2 * 8;       // (nx + 2) * ns
  const std::uint64_t s_face = 6 * 6 * 8;       // (nx + 2) * (ny + 2)
  CHECK(res.merged.bytes_sent() == 8 * (x_face + 2 * y_face + 2 * s_face));
  CHECK(res.merged.phase(Phase::step).n_cross_plane == 8 * 2);
}

TEST_CASE("timed spans charge the innermost category only") {
  TimingRecorder t;
  t.timed(Category::com, [&] {
    busy_for(6000us);
    t.timed(Category::usr, [&] { busy_for(4000us); });
  });
  const TimingReport r = t.report();
  CHECK(r.ns_usr >= 4'000'000);
  CHECK(r.ns_com >= 6'000'000);
  CHECK(r.ns_mpi == 0);
  CHECK(r.identity_holds());
  CHECK(r.ns_com + r.ns_usr == r.ns_total);

  TimingRecorder e;
  e.timed(Category::usr, [] {});
  CHECK(e.report().ns_total == e.report().ns_usr);

  TimingRecorder m;
  m.timed(Category::usr, [&] {
    busy_for(2000us);
    m.timed(Category::mpi, [&] { busy_for(3000us); });
  });
  const TimingReport mr = m.report();
  CHECK(mr.ns_mpi >= 3'000'000);
  CHECK(mr.ns_usr >= 2'000'000);
  CHECK(mr.ns_mpi + mr.ns_usr == mr.ns_total);
}

TEST_CASE("unbalanced spans are instrumentation errors") {
  TimingRecorder t;
  CHECK_THROWS_AS(t.end(Category::usr), InstrumentationError);
  t.begin(Category::com);
  CHECK_THROWS_AS(t.end(Category::usr), InstrumentationError);
  TimingRecorder open;
  open.begin(Category::usr);
  CHECK_THROWS_AS(open.report(), InstrumentationError);
}

TEST_CASE("rank runs satisfy the timing identity and merge by the critical rank") {
  auto res = run_ranks(GlobalGrid(16, 16, 2), {2, 2, 2}, [](RankContext& ctx) {
    Field f(ctx.block().nx(), ctx.block().ny(), ctx.block().ns());
    for (int it = 0; it < 20; ++it) {
      exchange_halos(ctx, f, Axes::xy);
      ctx.allreduce_sum(1.0);
      ctx.timed(Category::usr, [&] { busy_for(std::chrono::microseconds(50 * (ctx.rank() + 1))); });
    }
  });
  std::int64_t worst = 0;
  for (const auto& r : res.reports) {
    CHECK(r.identity_holds());
    CHECK(r.ns_sendrecv + r.ns_allreduce <= r.ns_mpi);
    CHECK(r.n_allreduce() == 20);
    worst = std::max(worst, r.ns_total);
  }
  CHECK(res.merged.ns_total == worst);
  CHECK(res.merged.n_allreduce() == 160);
  CHECK(res.merged.identity_holds());
}
