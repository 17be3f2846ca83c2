#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "helmscale/field.hpp"
#include "helmscale/grid.hpp"
#include "helmscale/timing.hpp"

namespace helmscale {

namespace detail {
class World;
}

/// Rank-local view of one grid level: interior sizes, global offset, and
/// the ranks holding the neighbouring points on that level.
struct Patch {
  int nx = 0, ny = 0, ns = 0;
  int x0 = 0, y0 = 0;
  Neighbors neighbors;
  bool active = true;

  bool wall_lo_x() const noexcept { return neighbors[Side::x_lo] == kWall; }
  bool wall_hi_x() const noexcept { return neighbors[Side::x_hi] == kWall; }
};

Patch patch_of(const LocalBlock& b);

enum class Axes : unsigned { none = 0, x = 1, y = 2, s = 4, xy = 3, xys = 7 };
constexpr Axes operator|(Axes a, Axes b) noexcept {
  return static_cast<Axes>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool has(Axes set, Axes a) noexcept {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(a)) != 0;
}

struct ExecOptions {
  /// Execution contexts (OS threads). Negative: HELMSCALE_WORKERS if set,
  /// else the hardware concurrency. 0: one per rank.
  int workers = -1;
  std::chrono::milliseconds timeout{30000};
  std::size_t stack_bytes = 512 * 1024;
};

/// Resolved context count for a run of `ranks` ranks.
int resolve_workers(const ExecOptions& opts, int ranks);

/// Everything a rank program may touch: its block, the two communication
/// primitives, and its private timing recorder.
class RankContext {
public:
  RankContext(detail::World& world, int rank);

  int rank() const noexcept { return block_.rank; }
  int size() const noexcept { return decomp_.total(); }
  const GlobalGrid& grid() const noexcept { return grid_; }
  const Decomposition& decomp() const noexcept { return decomp_; }
  const LocalBlock& block() const noexcept { return block_; }
  const Patch& patch() const noexcept { return patch_; }

  TimingRecorder& timer() noexcept { return timer_; }
  template <class F>
  decltype(auto) timed(Category c, F&& f) {
    return timer_.timed(c, std::forward<F>(f));
  }

  Phase phase() const noexcept { return phase_; }
  class PhaseScope {
  public:
    PhaseScope(RankContext& ctx, Phase p) : ctx_(ctx), saved_(ctx.phase_) { ctx.phase_ = p; }
    ~PhaseScope() { ctx_.phase_ = saved_; }
    PhaseScope(const PhaseScope&) = delete;
    PhaseScope& operator=(const PhaseScope&) = delete;

  private:
    RankContext& ctx_;
    Phase saved_;
  };
  [[nodiscard]] PhaseScope enter(Phase p) { return PhaseScope(*this, p); }

  /// Blocking exchange: sends to `dest` and receives from `source` under
  /// one tag. kWall on either side skips that half (still one call).
  void sendrecv(std::span<const double> send, int dest, std::span<double> recv, int source,
                int tag);
  struct Exchange {
    std::span<const double> send;
    int dest;
    std::span<double> recv;
    int source;
    int tag;
  };
  /// Two sendrecv calls with both sends posted before either receive, so a
  /// rank blocks at most once per pair. Counted and timed as two calls.
  void sendrecv_pair(const Exchange& a, const Exchange& b);

  void send(std::span<const double> data, int dest, int tag);
  void recv(std::span<double> data, int source, int tag);

  /// Global sum with a fixed pairwise tree over rank ids; every rank gets
  /// the same bits.
  std::vector<double> allreduce_sum(std::span<const double> values);
  double allreduce_sum(double value);

private:
  void post(std::span<const double> data, int dest, int tag);
  void take(std::span<double> data, int source, int tag);
  bool crosses_plane(int other) const noexcept;

  detail::World& world_;
  GlobalGrid grid_;
  Decomposition decomp_;
  LocalBlock block_;
  Patch patch_;
  TimingRecorder timer_;
  Phase phase_ = Phase::setup;
};

/// Fills halos on the level described by `patch`: each face halo gets the
/// adjacent interior face of the neighbour, walls follow the field's
/// WallRule. x pass then y pass (rows include x halos) so corners are valid.
void exchange_halos(RankContext& ctx, Field& f, const Patch& patch, Axes axes);
void exchange_halos(RankContext& ctx, Field& f, Axes axes);

namespace detail {
std::vector<TimingReport> execute(const GlobalGrid& grid, const Decomposition& decomp,
                                  const std::function<void(RankContext&)>& body,
                                  const ExecOptions& opts);
}

template <class T>
struct RunResult {
  std::vector<T> values;
  std::vector<TimingReport> reports;
  TimingReport merged;
};

/// Runs `program` once per rank, concurrently. Results come back ordered by
/// rank. A failing rank aborts the run; its exception is rethrown with the
/// rank id attached.
template <class F>
auto run_ranks(const GlobalGrid& grid, const Decomposition& decomp, F&& program,
               const ExecOptions& opts = {}) {
  using R = std::invoke_result_t<F&, RankContext&>;
  using V = std::conditional_t<std::is_void_v<R>, std::monostate, R>;
  std::vector<std::optional<V>> slots(static_cast<std::size_t>(decomp.total()));
  auto reports = detail::execute(
      grid, decomp,
      [&](RankContext& ctx) {
        if constexpr (std::is_void_v<R>) {
          program(ctx);
          slots[ctx.rank()].emplace();
        } else {
          slots[ctx.rank()].emplace(program(ctx));
        }
      },
      opts);
  RunResult<V> out;
  out.values.reserve(slots.size());
  for (auto& s : slots) out.values.push_back(std::move(*s));
  out.merged = TimingReport::merge(reports);
  out.reports = std::move(reports);
  return out;
}

}  // namespace helmscale
