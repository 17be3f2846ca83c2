#include "helmscale/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "helmscale/error.hpp"

namespace helmscale {

namespace {

constexpr int kTagData = 101;
constexpr int kTagStatus = 102;
constexpr unsigned char kMagic[4] = {'G', 'E', 'M', 'W'};

template <class T>
void put_le(unsigned char* out, T v) {
  for (std::size_t b = 0; b < sizeof(T); ++b) out[b] = static_cast<unsigned char>(v >> (8 * b));
}

template <class T>
T get_le(const unsigned char* in) {
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(in[b]) << (8 * b);
  return v;
}

void append_values(std::vector<unsigned char>& out, std::span<const double> values) {
  const std::size_t at = out.size();
  out.resize(at + 8 * values.size());
  for (std::size_t n = 0; n < values.size(); ++n)
    put_le(out.data() + at + 8 * n, std::bit_cast<std::uint64_t>(values[n]));
}

// Copies a rank's packed block into global x-fastest storage of `dims`.
void scatter_block(const LocalBlock& b, std::span<const double> block, std::uint64_t nx,
                   std::uint64_t ny, int s_offset, std::vector<double>& global) {
  std::size_t c = 0;
  for (int k = 0; k < b.ns(); ++k)
    for (int j = 0; j < b.ny(); ++j)
      for (int i = 0; i < b.nx(); ++i) {
        const std::uint64_t gx = static_cast<std::uint64_t>(b.x.begin + i);
        const std::uint64_t gy = static_cast<std::uint64_t>(b.y.begin + j);
        const std::uint64_t gs = static_cast<std::uint64_t>(b.s.begin + k - s_offset);
        global[gx + nx * (gy + ny * gs)] = block[c++];
      }
}

std::uint64_t write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write to '" + path + "' failed");
  return bytes.size();
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Gathers the blocks of `members` (which must include the caller as the
// first entry when it is the root) to members[0], then reports the root's
// write outcome back to every member.
template <class Write>
std::uint64_t gather_and_write(RankContext& ctx, const Field& f,
                               const std::vector<int>& members, int s_offset, int planes,
                               Write&& write) {
  const GlobalGrid& g = ctx.grid();
  const int root = members.front();
  std::vector<double> mine = f.interior();
  std::array<double, 2> status{1.0, 0.0};
  if (ctx.rank() != root) {
    ctx.send(mine, root, kTagData);
    ctx.recv(status, root, kTagStatus);
    if (status[0] == 0.0)
      throw IoError("snapshot write failed on rank " + std::to_string(root));
    return static_cast<std::uint64_t>(status[1]);
  }

  const auto nx = static_cast<std::uint64_t>(g.nx()), ny = static_cast<std::uint64_t>(g.ny());
  std::vector<double> global(nx * ny * static_cast<std::uint64_t>(planes));
  ctx.timed(Category::usr, [&] {
    scatter_block(ctx.block(), mine, nx, ny, s_offset, global);
  });
  std::vector<double> buf;
  for (std::size_t m = 1; m < members.size(); ++m) {
    const LocalBlock b = local_block(g, ctx.decomp(), members[m]);
    buf.resize(static_cast<std::size_t>(b.nx()) * b.ny() * b.ns());
    ctx.recv(buf, members[m], kTagData);
    ctx.timed(Category::usr, [&] { scatter_block(b, buf, nx, ny, s_offset, global); });
  }

  std::string failure;
  std::uint64_t bytes = 0;
  ctx.timed(Category::usr, [&] {
    const std::int64_t t0 = TimingRecorder::now_ns();
    try {
      bytes = write(global);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    ctx.timer().add_io(TimingRecorder::now_ns() - t0);
  });
  status = {failure.empty() ? 1.0 : 0.0, static_cast<double>(bytes)};
  for (std::size_t m = 1; m < members.size(); ++m) ctx.send(status, members[m], kTagStatus);
  if (!failure.empty()) throw IoError(failure);
  return bytes;
}

}  // namespace

std::string_view to_string(IoMode m) noexcept {
  switch (m) {
    case IoMode::none: return "none";
    case IoMode::single: return "single";
    case IoMode::multifile: return "multifile";
  }
  return "?";
}

IoMode parse_io_mode(std::string_view name) {
  for (IoMode m : {IoMode::none, IoMode::single, IoMode::multifile})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown io mode '" + std::string(name) + "' (none, single, multifile)");
}

void IoConfig::validate() const {
  if (mode != IoMode::none && prefix.empty())
    throw ConfigError("io mode " + std::string(to_string(mode)) + " needs a path prefix");
  if (every < 1) throw ConfigError("snapshot interval must be >= 1");
}

std::array<unsigned char, SnapshotHeader::kSize> SnapshotHeader::encode() const {
  std::array<unsigned char, kSize> out{};
  std::memcpy(out.data(), kMagic, 4);
  put_le<std::uint32_t>(out.data() + 4, kVersion);
  put_le<std::uint64_t>(out.data() + 8, nx);
  put_le<std::uint64_t>(out.data() + 16, ny);
  put_le<std::uint64_t>(out.data() + 24, ns);
  put_le<std::uint32_t>(out.data() + 32, kFloat64);
  put_le<std::uint32_t>(out.data() + 36, 0);
  put_le<std::uint64_t>(out.data() + 40, step);
  return out;
}

SnapshotHeader SnapshotHeader::decode(std::span<const unsigned char> bytes) {
  if (bytes.size() < kSize)
    throw FormatError("snapshot header needs " + std::to_string(kSize) + " bytes, got " +
                      std::to_string(bytes.size()));
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad snapshot magic");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version));
  const auto dtype = get_le<std::uint32_t>(bytes.data() + 32);
  if (dtype != kFloat64) throw FormatError("unsupported element type " + std::to_string(dtype));
  SnapshotHeader h;
  h.nx = get_le<std::uint64_t>(bytes.data() + 8);
  h.ny = get_le<std::uint64_t>(bytes.data() + 16);
  h.ns = get_le<std::uint64_t>(bytes.data() + 24);
  h.step = get_le<std::uint64_t>(bytes.data() + 40);
  if (h.nx == 0 || h.ny == 0 || h.ns == 0) throw FormatError("snapshot with empty dimension");
  return h;
}

std::vector<unsigned char> encode_snapshot(const Snapshot& snap) {
  if (snap.values.size() != snap.header.values())
    throw FormatError("snapshot holds " + std::to_string(snap.values.size()) +
                      " values, header says " + std::to_string(snap.header.values()));
  const auto head = snap.header.encode();
  std::vector<unsigned char> out(head.begin(), head.end());
  append_values(out, snap.values);
  return out;
}

Snapshot decode_snapshot(std::span<const unsigned char> bytes, std::string_view what) {
  Snapshot s;
  s.header = SnapshotHeader::decode(bytes);
  const std::uint64_t expected = SnapshotHeader::kSize + 8 * s.header.values();
  if (bytes.size() != expected)
    throw FormatError(std::string(what) + ": expected " + std::to_string(expected) +
                      " bytes for " + std::to_string(s.header.nx) + "x" +
                      std::to_string(s.header.ny) + "x" + std::to_string(s.header.ns) +
                      ", got " + std::to_string(bytes.size()));
  s.values.resize(s.header.values());
  for (std::size_t n = 0; n < s.values.size(); ++n)
    s.values[n] = std::bit_cast<double>(
        get_le<std::uint64_t>(bytes.data() + SnapshotHeader::kSize + 8 * n));
  return s;
}

std::string multifile_name(const std::string& prefix, int plane) {
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "_s%04d.dat", plane);
  return prefix + suffix;
}

std::uint64_t write_single(RankContext& ctx, const Field& f, const std::string& path,
                           std::uint64_t step) {
  const LocalBlock& b = ctx.block();
  if (f.nx() != b.nx() || f.ny() != b.ny() || f.ns() != b.ns())
    throw ShapeError("write_single: field does not match the rank's block");
  auto phase = ctx.enter(Phase::io);
  return ctx.timed(Category::com, [&] {
    std::vector<int> members(static_cast<std::size_t>(ctx.size()));
    for (int r = 0; r < ctx.size(); ++r) members[static_cast<std::size_t>(r)] = r;
    const GlobalGrid& g = ctx.grid();
    return gather_and_write(ctx, f, members, 0, g.ns(), [&](const std::vector<double>& v) {
      Snapshot s{{static_cast<std::uint64_t>(g.nx()), static_cast<std::uint64_t>(g.ny()),
                  static_cast<std::uint64_t>(g.ns()), step},
                 v};
      return write_file(path, encode_snapshot(s));
    });
  });
}

std::vector<std::string> write_multifile(RankContext& ctx, const Field& f,
                                         const std::string& prefix, std::uint64_t step) {
  const LocalBlock& b = ctx.block();
  if (f.nx() != b.nx() || f.ny() != b.ny() || f.ns() != b.ns())
    throw ShapeError("write_multifile: field does not match the rank's block");
  auto phase = ctx.enter(Phase::io);
  std::vector<std::string> files;
  ctx.timed(Category::com, [&] {
    const Decomposition& d = ctx.decomp();
    std::vector<int> members;
    for (int iy = 0; iy < d.py; ++iy)
      for (int ix = 0; ix < d.px; ++ix) members.push_back(rank_of(d, ix, iy, b.is));
    const GlobalGrid& g = ctx.grid();
    const int planes = b.ns();
    gather_and_write(ctx, f, members, b.s.begin, planes, [&](const std::vector<double>& v) {
      const std::size_t plane = static_cast<std::size_t>(g.nx()) * g.ny();
      std::uint64_t bytes = 0;
      for (int k = 0; k < planes; ++k) {
        Snapshot s{{static_cast<std::uint64_t>(g.nx()), static_cast<std::uint64_t>(g.ny()), 1,
                    step},
                   std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(k * plane),
                                       v.begin() + static_cast<std::ptrdiff_t>((k + 1) * plane))};
        const std::string name = multifile_name(prefix, b.s.begin + k);
        bytes += write_file(name, encode_snapshot(s));
        files.push_back(name);
      }
      return bytes;
    });
  });
  return files;
}

Snapshot read_snapshot(const std::string& path, IoMode mode) {
  if (mode == IoMode::single) {
    const auto bytes = read_file(path);
    return decode_snapshot(bytes, path);
  }
  if (mode != IoMode::multifile) throw ConfigError("read_snapshot needs mode single or multifile");
  Snapshot out;
  for (int k = 0;; ++k) {
    const std::string name = multifile_name(path, k);
    if (!std::filesystem::exists(name)) {
      if (k == 0) throw IoError("no snapshot planes at '" + name + "'");
      break;
    }
    const auto bytes = read_file(name);
    Snapshot plane = decode_snapshot(bytes, name);
    if (plane.header.ns != 1)
      throw FormatError(name + ": plane file with ns = " + std::to_string(plane.header.ns));
    if (k == 0) {
      out.header = plane.header;
      out.header.ns = 0;
    } else if (plane.header.nx != out.header.nx || plane.header.ny != out.header.ny ||
               plane.header.step != out.header.step) {
      throw FormatError(name + ": plane header disagrees with plane 0");
    }
    out.values.insert(out.values.end(), plane.values.begin(), plane.values.end());
    ++out.header.ns;
  }
  return out;
}

}  // namespace helmscale
