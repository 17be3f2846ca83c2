#include "helmscale/comm.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <boost/fiber/algo/round_robin.hpp>
#include <boost/fiber/algo/shared_work.hpp>
#include <boost/fiber/all.hpp>

#include "helmscale/error.hpp"

namespace helmscale {

namespace fibers = boost::fibers;

namespace {

// Thrown inside ranks that notice another rank already failed.
struct Aborted {};

constexpr auto kPoll = std::chrono::milliseconds(100);

}  // namespace

namespace detail {

struct Mailbox {
  struct Queue {
    int source = 0;
    int tag = 0;
    std::deque<std::vector<double>> messages;
  };

  fibers::mutex m;
  fibers::condition_variable cv;
  // A rank talks to a handful of (source, tag) pairs; a flat list beats a map.
  std::deque<Queue> queues;  // push_back keeps references to existing queues valid
  // Consumed message buffers, reused by senders to avoid an allocation per message.
  std::vector<std::vector<double>> spare;

  std::deque<std::vector<double>>& queue(int source, int tag) {
    for (auto& q : queues)
      if (q.source == source && q.tag == tag) return q.messages;
    queues.push_back({source, tag, {}});
    return queues.back().messages;
  }
};

struct Collective {
  fibers::mutex m;
  fibers::condition_variable cv;
  std::uint64_t generation = 0;
  int arrived = 0;
  std::size_t length = 0;
  std::vector<std::vector<double>> slots;
  std::vector<double> result;
};

class World {
public:
  World(const GlobalGrid& g, const Decomposition& d, const ExecOptions& o)
      : grid(g), decomp(d), opts(o), nranks(d.total()),
        finished(std::make_unique<std::atomic<bool>[]>(static_cast<std::size_t>(nranks))) {
    mail.reserve(static_cast<std::size_t>(nranks));
    for (int r = 0; r < nranks; ++r) {
      mail.push_back(std::make_unique<Mailbox>());
      finished[r].store(false);
    }
    coll.slots.resize(static_cast<std::size_t>(nranks));
  }

  void fail(int rank, std::exception_ptr ep) {
    {
      std::lock_guard lk(err_m);
      if (!error) {
        error = ep;
        failed_rank = rank;
      }
    }
    abort.store(true);
    for (auto& mb : mail) {
      std::unique_lock lk(mb->m);
      mb->cv.notify_all();
    }
    std::unique_lock lk(coll.m);
    coll.cv.notify_all();
  }

  void mark_finished(int rank) {
    finished[rank].store(true, std::memory_order_release);
    n_finished.fetch_add(1, std::memory_order_acq_rel);
    std::unique_lock lk(coll.m);
    coll.cv.notify_all();
  }

  GlobalGrid grid;
  Decomposition decomp;
  ExecOptions opts;
  int nranks;
  std::vector<std::unique_ptr<Mailbox>> mail;
  Collective coll;
  std::unique_ptr<std::atomic<bool>[]> finished;
  std::atomic<int> n_finished{0};
  std::atomic<bool> abort{false};
  std::mutex err_m;
  std::exception_ptr error;
  int failed_rank = -1;
};

}  // namespace detail

Patch patch_of(const LocalBlock& b) {
  Patch p;
  p.nx = b.nx();
  p.ny = b.ny();
  p.ns = b.ns();
  p.x0 = b.x.begin;
  p.y0 = b.y.begin;
  p.neighbors = b.neighbors;
  p.active = true;
  return p;
}

int resolve_workers(const ExecOptions& opts, int ranks) {
  int t = opts.workers;
  if (t < 0) {
    if (const char* env = std::getenv("HELMSCALE_WORKERS"); env && *env) {
      t = std::atoi(env);
    } else {
      t = static_cast<int>(std::thread::hardware_concurrency());
      if (t < 1) t = 1;
    }
  }
  if (t == 0 || t > ranks) t = ranks;
  return std::max(t, 1);
}

RankContext::RankContext(detail::World& world, int rank)
    : world_(world), grid_(world.grid), decomp_(world.decomp),
      block_(local_block(world.grid, world.decomp, rank)), patch_(patch_of(block_)) {}

bool RankContext::crosses_plane(int other) const noexcept {
  return other / (decomp_.px * decomp_.py) != block_.is;
}

void RankContext::post(std::span<const double> data, int dest, int tag) {
  if (dest < 0 || dest >= size())
    throw ProtocolError("send to invalid rank " + std::to_string(dest));
  auto& mb = *world_.mail[dest];
  {
    std::unique_lock lk(mb.m);
    std::vector<double> buf;
    if (!mb.spare.empty()) {
      buf = std::move(mb.spare.back());
      mb.spare.pop_back();
    }
    buf.assign(data.begin(), data.end());
    mb.queue(rank(), tag).push_back(std::move(buf));
  }
  mb.cv.notify_all();
}

void RankContext::take(std::span<double> data, int source, int tag) {
  if (source < 0 || source >= size())
    throw ProtocolError("receive from invalid rank " + std::to_string(source));
  auto& mb = *world_.mail[rank()];
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::unique_lock lk(mb.m);
  auto& q = mb.queue(source, tag);
  for (;;) {
    const bool source_done = world_.finished[source].load(std::memory_order_acquire);
    if (!q.empty()) {
      std::vector<double> msg = std::move(q.front());
      q.pop_front();
      if (msg.size() != data.size())
        throw ProtocolError("message from rank " + std::to_string(source) + " tag " +
                            std::to_string(tag) + " has " + std::to_string(msg.size()) +
                            " values, receiver expected " + std::to_string(data.size()));
      std::copy(msg.begin(), msg.end(), data.begin());
      mb.spare.push_back(std::move(msg));
      return;
    }
    if (world_.abort.load()) throw Aborted{};
    if (source_done)
      throw ProtocolError("waiting for a message from rank " + std::to_string(source) +
                          " (tag " + std::to_string(tag) + ") which has already exited");
    const auto now = std::chrono::steady_clock::now();
    if (!deadline) deadline = now + world_.opts.timeout;
    if (now >= *deadline)
      throw ProtocolError("timed out waiting for a message from rank " +
                          std::to_string(source) + " (tag " + std::to_string(tag) + ")");
    mb.cv.wait_until(lk, std::min(*deadline, now + kPoll));
  }
}

void RankContext::sendrecv(std::span<const double> send_buf, int dest,
                           std::span<double> recv_buf, int source, int tag) {
  const std::int64_t t0 = TimingRecorder::now_ns();
  TimingRecorder::Scope span(timer_, Category::mpi);
  if (dest != kWall) post(send_buf, dest, tag);
  if (source != kWall) take(recv_buf, source, tag);
  const bool cross = (dest != kWall && crosses_plane(dest)) ||
                     (source != kWall && crosses_plane(source));
  timer_.record_sendrecv(phase_, TimingRecorder::now_ns() - t0,
                         dest != kWall ? send_buf.size_bytes() : 0, cross);
}

void RankContext::sendrecv_pair(const Exchange& a, const Exchange& b) {
  const std::int64_t t0 = TimingRecorder::now_ns();
  TimingRecorder::Scope span(timer_, Category::mpi);
  if (a.dest != kWall) post(a.send, a.dest, a.tag);
  if (b.dest != kWall) post(b.send, b.dest, b.tag);
  if (a.source != kWall) take(a.recv, a.source, a.tag);
  const std::int64_t t1 = TimingRecorder::now_ns();
  if (b.source != kWall) take(b.recv, b.source, b.tag);
  for (const Exchange* e : {&a, &b}) {
    const bool cross = (e->dest != kWall && crosses_plane(e->dest)) ||
                       (e->source != kWall && crosses_plane(e->source));
    timer_.record_sendrecv(phase_, e == &a ? t1 - t0 : TimingRecorder::now_ns() - t1,
                           e->dest != kWall ? e->send.size_bytes() : 0, cross);
  }
}

void RankContext::send(std::span<const double> data, int dest, int tag) {
  sendrecv(data, dest, {}, kWall, tag);
}

void RankContext::recv(std::span<double> data, int source, int tag) {
  sendrecv({}, kWall, data, source, tag);
}

std::vector<double> RankContext::allreduce_sum(std::span<const double> values) {
  const std::int64_t t0 = TimingRecorder::now_ns();
  TimingRecorder::Scope span(timer_, Category::mpi);
  auto& c = world_.coll;
  std::vector<double> out;
  {
    std::unique_lock lk(c.m);
    const std::uint64_t gen = c.generation;
    if (c.arrived == 0) {
      c.length = values.size();
    } else if (values.size() != c.length) {
      throw ProtocolError("allreduce length mismatch: " + std::to_string(values.size()) +
                          " values here, " + std::to_string(c.length) + " from other ranks");
    }
    c.slots[rank()].assign(values.begin(), values.end());
    if (++c.arrived == world_.nranks) {
      // pairwise tree over rank ids: (0+1)+(2+3), ...
      for (int stride = 1; stride < world_.nranks; stride *= 2)
        for (int i = 0; i + stride < world_.nranks; i += 2 * stride) {
          auto& acc = c.slots[i];
          const auto& add = c.slots[i + stride];
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += add[k];
        }
      c.result = c.slots[0];
      c.arrived = 0;
      ++c.generation;
      c.cv.notify_all();
    } else {
      const auto deadline = std::chrono::steady_clock::now() + world_.opts.timeout;
      while (c.generation == gen) {
        if (world_.abort.load()) throw Aborted{};
        if (world_.n_finished.load(std::memory_order_acquire) > 0)
          throw ProtocolError("allreduce entered but another rank exited without joining it");
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) throw ProtocolError("timed out in allreduce");
        c.cv.wait_until(lk, std::min(deadline, now + kPoll));
      }
    }
    out = c.result;
  }
  timer_.record_allreduce(phase_, TimingRecorder::now_ns() - t0);
  return out;
}

double RankContext::allreduce_sum(double value) {
  const double v[1] = {value};
  return allreduce_sum(std::span<const double>(v, 1))[0];
}

namespace detail {

namespace {

void rank_main(World& world, int rank, const std::function<void(RankContext&)>& body,
               TimingReport& report) {
  try {
    RankContext ctx(world, rank);
    ctx.timer().begin(Category::com);
    body(ctx);
    ctx.timer().end(Category::com);
    report = ctx.timer().report();
  } catch (const Aborted&) {
  } catch (Error& e) {
    e.set_rank(rank);
    world.fail(rank, std::current_exception());
  } catch (const std::exception& e) {
    world.fail(rank, std::make_exception_ptr(RankFailure(rank, e.what())));
  } catch (...) {
    world.fail(rank, std::make_exception_ptr(RankFailure(rank, "unknown exception")));
  }
  world.mark_finished(rank);
}

}  // namespace

std::vector<TimingReport> execute(const GlobalGrid& grid, const Decomposition& decomp,
                                  const std::function<void(RankContext&)>& body,
                                  const ExecOptions& opts) {
  World world(grid, decomp, opts);
  const int nranks = decomp.total();
  const int nthreads = resolve_workers(opts, nranks);
  std::vector<TimingReport> reports(static_cast<std::size_t>(nranks));

  fibers::mutex done_m;
  fibers::condition_variable done_cv;
  bool done = false;

  auto launcher = [&] {
    // One worker needs no shared ready queue.
    if (nthreads == 1) fibers::use_scheduling_algorithm<fibers::algo::round_robin>();
    else fibers::use_scheduling_algorithm<fibers::algo::shared_work>(true);
    std::vector<fibers::fiber> ranks;
    ranks.reserve(static_cast<std::size_t>(nranks));
    for (int r = 0; r < nranks; ++r)
      ranks.emplace_back(std::allocator_arg,
                         fibers::protected_fixedsize_stack(opts.stack_bytes),
                         [&, r] { rank_main(world, r, body, reports[r]); });
    for (auto& f : ranks) f.join();
    {
      std::unique_lock lk(done_m);
      done = true;
    }
    done_cv.notify_all();
  };
  auto helper = [&] {
    fibers::use_scheduling_algorithm<fibers::algo::shared_work>(true);
    std::unique_lock lk(done_m);
    done_cv.wait(lk, [&] { return done; });
  };

  std::vector<std::thread> threads;
  threads.emplace_back(launcher);
  for (int t = 1; t < nthreads; ++t) threads.emplace_back(helper);
  for (auto& t : threads) t.join();

  if (world.error) std::rethrow_exception(world.error);
  return reports;
}

}  // namespace detail

}  // namespace helmscale
