#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "helmscale/comm.hpp"
#include "helmscale/field.hpp"

namespace helmscale {

enum class IoMode { none, single, multifile };

std::string_view to_string(IoMode m) noexcept;
IoMode parse_io_mode(std::string_view name);

struct IoConfig {
  IoMode mode = IoMode::none;
  std::string prefix;
  /// Snapshot every this many steps; the last step is always written.
  int every = 100;

  void validate() const;
};

/// 48 bytes, little-endian: "GEMW", u32 version, u64 nx, ny, ns, u32 dtype
/// (1 = f64), u32 reserved (0), u64 step.
struct SnapshotHeader {
  static constexpr std::size_t kSize = 48;
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::uint32_t kFloat64 = 1;

  std::uint64_t nx = 0, ny = 0, ns = 0;
  std::uint64_t step = 0;

  std::uint64_t values() const noexcept { return nx * ny * ns; }
  std::array<unsigned char, kSize> encode() const;
  /// Throws FormatError on bad magic, version or element type.
  static SnapshotHeader decode(std::span<const unsigned char> bytes);

  friend bool operator==(const SnapshotHeader&, const SnapshotHeader&) = default;
};

/// Global field in x-fastest, then y, then s order.
struct Snapshot {
  SnapshotHeader header;
  std::vector<double> values;
};

std::vector<unsigned char> encode_snapshot(const Snapshot& snap);
Snapshot decode_snapshot(std::span<const unsigned char> bytes, std::string_view what = "buffer");

/// "<prefix>_sNNNN.dat".
std::string multifile_name(const std::string& prefix, int plane);

/// Gathers the field to rank 0 in rank order and writes one file. Collective;
/// a write failure raises IoError on every rank. Returns the file size.
std::uint64_t write_single(RankContext& ctx, const Field& f, const std::string& path,
                           std::uint64_t step = 0);

/// One file per s-plane, written by the root (0, 0, is) of each s-slab from
/// data gathered inside the slab only. Returns this slab's files (empty on
/// non-root ranks).
std::vector<std::string> write_multifile(RankContext& ctx, const Field& f,
                                         const std::string& prefix, std::uint64_t step = 0);

/// `mode` single reads `path` verbatim; multifile reads <path>_s0000.dat,
/// _s0001.dat, ... until the first missing plane.
Snapshot read_snapshot(const std::string& path, IoMode mode);

}  // namespace helmscale
