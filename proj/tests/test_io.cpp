#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "helmscale/error.hpp"
#include "helmscale/harness.hpp"
#include "helmscale/io.hpp"
#include "oracle.hpp"

using namespace helmscale;
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("helmscale_io_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const fs::path kGolden = HELMSCALE_GOLDEN_DIR;

std::vector<double> ramp(int nx, int ny, int ns) {
  std::vector<double> v;
  for (int k = 0; k < ns; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) v.push_back(i + 10.0 * j + 100.0 * k + 0.5);
  return v;
}

// Writes `global` from decomposition d in the given mode and returns the
// io-phase counters of every rank.
std::vector<PhaseCounters> write_global(const GlobalGrid& g, const Decomposition& d,
                                        const std::vector<double>& global, IoMode mode,
                                        const std::string& path, std::uint64_t step = 0) {
  auto res = run_ranks(g, d, [&](RankContext& ctx) {
    const Field f = testing::block_of(ctx.block(), g, global);
    auto phase = ctx.enter(Phase::io);
    if (mode == IoMode::single) write_single(ctx, f, path, step);
    else write_multifile(ctx, f, path, step);
  });
  std::vector<PhaseCounters> out;
  for (const auto& r : res.reports) out.push_back(r.phase(Phase::io));
  return out;
}

}  // namespace

TEST_CASE("header layout") {
  SnapshotHeader h{4, 8, 2, 9};
  const auto bytes = h.encode();
  CHECK(bytes.size() == 48);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "GEMW");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 4);
  CHECK(bytes[16] == 8);
  CHECK(bytes[24] == 2);
  CHECK(bytes[32] == 1);
  CHECK(bytes[36] == 0);
  CHECK(bytes[40] == 9);
  CHECK(SnapshotHeader::decode(bytes) == h);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(SnapshotHeader::decode(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(SnapshotHeader::decode(bad), FormatError);
  bad = bytes;
  bad[32] = 2;
  CHECK_THROWS_AS(SnapshotHeader::decode(bad), FormatError);
  CHECK_THROWS_AS(SnapshotHeader::decode(std::span(bytes).first(40)), FormatError);
}

TEST_CASE("single-file output matches the golden files byte for byte") {
  TempDir dir("golden");
  const GlobalGrid g(4, 4, 1);
  write_global(g, {1, 1, 1}, std::vector<double>(16, 0.0), IoMode::single, dir / "zeros.dat");
  CHECK(slurp(dir / "zeros.dat") == slurp(kGolden / "zeros_4x4x1.dat"));

  const GlobalGrid g2(4, 4, 2);
  for (Decomposition d : {Decomposition{1, 1, 1}, Decomposition{2, 2, 2}, Decomposition{4, 1, 2}}) {
    write_global(g2, d, ramp(4, 4, 2), IoMode::single, dir / "ramp.dat", 7);
    CHECK(slurp(dir / "ramp.dat") == slurp(kGolden / "ramp_4x4x2_step7.dat"));
  }

  const Snapshot s = read_snapshot((kGolden / "ramp_4x4x2_step7.dat").string(), IoMode::single);
  CHECK(s.header == SnapshotHeader{4, 4, 2, 7});
  CHECK(s.values == ramp(4, 4, 2));
}

TEST_CASE("single-file bytes do not depend on the decomposition") {
  TempDir dir("decomp");
  const GlobalGrid g(16, 32, 4);
  const auto v = testing::random_values(static_cast<std::size_t>(g.points()), 31);
  write_global(g, {1, 1, 1}, v, IoMode::single, dir / "ref.dat", 3);
  const auto ref = slurp(dir / "ref.dat");
  CHECK(ref.size() == 48 + 8 * v.size());
  for (Decomposition d : {Decomposition{2, 2, 1}, Decomposition{4, 8, 4}, Decomposition{1, 4, 2}}) {
    write_global(g, d, v, IoMode::single, dir / "x.dat", 3);
    CHECK(slurp(dir / "x.dat") == ref);
  }
}

TEST_CASE("round trips are exact") {
  TempDir dir("roundtrip");
  const GlobalGrid g(8, 16, 4);
  const auto v = testing::random_values(static_cast<std::size_t>(g.points()), 32, -1e300, 1e300);
  write_global(g, {2, 2, 2}, v, IoMode::single, dir / "one.dat", 11);
  const Snapshot s = read_snapshot(dir / "one.dat", IoMode::single);
  CHECK(s.values == v);
  CHECK(s.header == SnapshotHeader{8, 16, 4, 11});

  write_global(g, {2, 4, 4}, v, IoMode::multifile, dir / "multi", 11);
  const Snapshot m = read_snapshot(dir / "multi", IoMode::multifile);
  CHECK(m.values == v);
  CHECK(m.header == s.header);

  Snapshot in{{2, 2, 1, 5}, {1.0, -0.0, 3.25, 1e-310}};
  const Snapshot out = decode_snapshot(encode_snapshot(in));
  CHECK(out.header == in.header);
  CHECK(std::memcmp(out.values.data(), in.values.data(), 32) == 0);
}

TEST_CASE("multi-file output has one file per plane and matches the single payload") {
  TempDir dir("multi");
  const GlobalGrid g(8, 8, 4);
  const auto v = testing::random_values(256, 33);
  write_global(g, {1, 1, 1}, v, IoMode::single, dir / "single.dat");
  const auto counters = write_global(g, {2, 2, 4}, v, IoMode::multifile, dir / "plane");
  std::vector<unsigned char> payload;
  for (int k = 0; k < 4; ++k) {
    REQUIRE(fs::exists(multifile_name(dir / "plane", k)));
    const auto bytes = slurp(multifile_name(dir / "plane", k));
    REQUIRE(bytes.size() == 48 + 8 * 64);
    const SnapshotHeader h = SnapshotHeader::decode(bytes);
    CHECK(h == SnapshotHeader{8, 8, 1, 0});
    payload.insert(payload.end(), bytes.begin() + 48, bytes.end());
  }
  CHECK_FALSE(fs::exists(multifile_name(dir / "plane", 4)));
  const auto single = slurp(dir / "single.dat");
  CHECK(payload == std::vector<unsigned char>(single.begin() + 48, single.end()));

  // Writer groups never talk across s-slabs.
  for (const auto& c : counters) CHECK(c.n_cross_plane == 0);
  std::uint64_t cross = 0;
  for (const auto& c : write_global(g, {2, 2, 4}, v, IoMode::single, dir / "s.dat"))
    cross += c.n_cross_plane;
  CHECK(cross > 0);
}

TEST_CASE("single and multi-file readers agree") {
  TempDir dir("cross");
  const GlobalGrid g(16, 16, 8);
  const auto v = testing::random_values(static_cast<std::size_t>(g.points()), 34);
  write_global(g, {4, 2, 2}, v, IoMode::single, dir / "a.dat", 5);
  write_global(g, {1, 4, 8}, v, IoMode::multifile, dir / "b", 5);
  const Snapshot a = read_snapshot(dir / "a.dat", IoMode::single);
  const Snapshot b = read_snapshot(dir / "b", IoMode::multifile);
  CHECK(a.header == b.header);
  CHECK(std::memcmp(a.values.data(), b.values.data(), 8 * a.values.size()) == 0);
}

TEST_CASE("damaged files are format errors") {
  TempDir dir("bad");
  const auto good = slurp(kGolden / "ramp_4x4x2_step7.dat");

  auto cut = good;
  cut.resize(good.size() - 8);
  spit(dir / "cut.dat", cut);
  try {
    read_snapshot(dir / "cut.dat", IoMode::single);
    FAIL("truncated file was accepted");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(good.size())) != std::string::npos);
    CHECK(msg.find(std::to_string(cut.size())) != std::string::npos);
  }

  auto dims = good;
  dims[8] = 8;  // nx = 8 promises twice the payload
  spit(dir / "dims.dat", dims);
  CHECK_THROWS_AS(read_snapshot(dir / "dims.dat", IoMode::single), FormatError);

  auto longer = good;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_snapshot(longer), FormatError);

  CHECK_THROWS_AS(decode_snapshot(std::vector<unsigned char>(10, 0)), FormatError);
  CHECK_THROWS_AS(read_snapshot(dir / "missing.dat", IoMode::single), IoError);
  CHECK_THROWS_AS(read_snapshot(dir / "missing", IoMode::multifile), IoError);
}

TEST_CASE("an unwritable path fails on every rank") {
  // A regular file in the parent chain blocks directory creation, even as root.
  TempDir dir("unwritable");
  spit(dir / "blocker", {1});
  const GlobalGrid g(8, 8, 2);
  const std::string path = dir / "blocker/snap";
  for (IoMode mode : {IoMode::single, IoMode::multifile}) {
    int failures = 0;
    run_ranks(g, {2, 2, 2}, [&](RankContext& ctx) {
      Field f(4, 4, 1);
      try {
        if (mode == IoMode::single) write_single(ctx, f, path);
        else write_multifile(ctx, f, path);
      } catch (const IoError&) {
        ++failures;
      }
    });
    CHECK(failures == 8);
  }
}

TEST_CASE("io config and names") {
  CHECK(multifile_name("out/snap", 7) == "out/snap_s0007.dat");
  CHECK(multifile_name("p", 63) == "p_s0063.dat");
  IoConfig c;
  CHECK_NOTHROW(c.validate());
  c.mode = IoMode::multifile;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.prefix = "x";
  CHECK_NOTHROW(c.validate());
  CHECK(parse_io_mode("single") == IoMode::single);
  CHECK(parse_io_mode(to_string(IoMode::multifile)) == IoMode::multifile);
  CHECK_THROWS_AS(parse_io_mode("striped"), ConfigError);
}

TEST_CASE("tokamak cases write 16, 32 and 64 plane files") {
  TempDir dir("tokamak");
  const std::pair<const char*, int> cases[] = {
      {"small-thin", 16}, {"medium-thin", 32}, {"large-thin", 64}};
  for (const auto& [name, planes] : cases) {
    RunConfig cfg;
    cfg.case_spec = CaseSpec::parse(name);
    cfg.per_core = {2, 2, 1};
    cfg.ranks = Decomposition{1, 1, planes};
    cfg.solver.kind = SolverKind::dummy;
    cfg.steps = 1;
    cfg.repeats = 1;
    cfg.io = {IoMode::multifile, dir / name, 100};
    const CaseResult r = run_case(cfg);
    CHECK(r.layout.grid.ns() == planes);
    CHECK(r.files.size() == static_cast<std::size_t>(planes));
    for (int k = 0; k < planes; ++k) CHECK(fs::exists(multifile_name(dir / name, k)));
    CHECK(read_snapshot(dir / name, IoMode::multifile).header.ns ==
          static_cast<std::uint64_t>(planes));
  }
}
