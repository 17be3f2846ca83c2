#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <exception>
#include <span>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace helmscale {

/// Scalasca-style regions: communication primitives, leaf compute, and
/// orchestration code that calls either of the two.
enum class Category { mpi = 0, usr, com };

/// Program phase that communication counters are charged to.
enum class Phase { setup = 0, step, solver, io };
inline constexpr int kPhaseCount = 4;

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Phase p) noexcept;

struct PhaseCounters {
  std::uint64_t n_sendrecv = 0;
  std::uint64_t n_allreduce = 0;
  std::uint64_t bytes_sent = 0;
  /// Point-to-point messages whose partner sits in a different s-slab.
  std::uint64_t n_cross_plane = 0;
  std::int64_t ns_sendrecv = 0;
  std::int64_t ns_allreduce = 0;

  PhaseCounters& operator+=(const PhaseCounters& o) noexcept;
  friend bool operator==(const PhaseCounters&, const PhaseCounters&) = default;
  /// Equality of the counts, ignoring the time buckets.
  bool same_counts(const PhaseCounters& o) const noexcept {
    return n_sendrecv == o.n_sendrecv && n_allreduce == o.n_allreduce &&
           bytes_sent == o.bytes_sent && n_cross_plane == o.n_cross_plane;
  }
};

/// Wall time partitioned into MPI/USR/COM plus per-primitive buckets.
/// Durations are integer nanoseconds so the category identity is exact.
struct TimingReport {
  std::int64_t ns_total = 0;
  std::int64_t ns_mpi = 0;
  std::int64_t ns_usr = 0;
  std::int64_t ns_com = 0;
  std::int64_t ns_sendrecv = 0;
  std::int64_t ns_allreduce = 0;
  std::int64_t ns_io = 0;
  std::uint64_t n_spans = 0;
  std::array<PhaseCounters, kPhaseCount> phases{};

  const PhaseCounters& phase(Phase p) const noexcept { return phases[static_cast<int>(p)]; }
  PhaseCounters totals() const noexcept;
  std::uint64_t n_sendrecv() const noexcept { return totals().n_sendrecv; }
  std::uint64_t n_allreduce() const noexcept { return totals().n_allreduce; }
  std::uint64_t bytes_sent() const noexcept { return totals().bytes_sent; }

  double t_total() const noexcept { return ns_total * 1e-9; }
  double t_mpi() const noexcept { return ns_mpi * 1e-9; }
  double t_usr() const noexcept { return ns_usr * 1e-9; }
  double t_com() const noexcept { return ns_com * 1e-9; }
  double t_sendrecv() const noexcept { return ns_sendrecv * 1e-9; }
  double t_allreduce() const noexcept { return ns_allreduce * 1e-9; }
  double t_io() const noexcept { return ns_io * 1e-9; }

  /// |mpi + usr + com - total| in nanoseconds.
  std::int64_t identity_gap() const noexcept;
  bool identity_holds() const noexcept {
    return static_cast<std::uint64_t>(identity_gap()) <= n_spans;
  }

  /// Critical-rank times (max t_total) with counters summed over ranks.
  static TimingReport merge(std::span<const TimingReport> ranks);
  bool same_counters(const TimingReport& o) const noexcept {
    for (int p = 0; p < kPhaseCount; ++p)
      if (!phases[p].same_counts(o.phases[p])) return false;
    return true;
  }
};

/// Rank-private recorder. Spans nest; a span's own time excludes the time
/// of spans opened inside it (innermost category only).
class TimingRecorder {
public:
  using Clock = std::chrono::steady_clock;

  void begin(Category c);
  void end(Category c);

  template <class F>
  decltype(auto) timed(Category c, F&& f) {
    Scope scope(*this, c);
    return std::forward<F>(f)();
  }

  class Scope {
  public:
    Scope(TimingRecorder& r, Category c) : r_(r), c_(c) { r_.begin(c_); }
    ~Scope() noexcept(false) {
      if (std::uncaught_exceptions() == uncaught_) r_.end(c_);
      else r_.abandon();
    }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

  private:
    TimingRecorder& r_;
    Category c_;
    int uncaught_ = std::uncaught_exceptions();
  };

  void record_sendrecv(Phase p, std::int64_t ns, std::uint64_t bytes, bool cross_plane);
  void record_allreduce(Phase p, std::int64_t ns);
  void add_io(std::int64_t ns) noexcept { ns_io_ += ns; }

  /// Discards everything recorded so far; open spans restart now.
  void restart();

  std::size_t depth() const noexcept { return stack_.size(); }
  const PhaseCounters& counters(Phase p) const noexcept {
    return phases_[static_cast<int>(p)];
  }
  /// Throws InstrumentationError if any span is still open.
  TimingReport report() const;

  static std::int64_t now_ns() noexcept {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               Clock::now().time_since_epoch())
        .count();
  }

private:
  struct Frame {
    Category category;
    std::int64_t start;
    std::int64_t children;
  };

  void abandon() noexcept;

  std::vector<Frame> stack_;
  std::array<std::int64_t, 3> own_{};
  std::int64_t root_total_ = 0;
  std::int64_t ns_io_ = 0;
  std::uint64_t n_spans_ = 0;
  std::array<PhaseCounters, kPhaseCount> phases_{};
};

}  // namespace helmscale
