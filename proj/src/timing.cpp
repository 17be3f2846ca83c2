#include "helmscale/timing.hpp"

#include <algorithm>
#include <cstdlib>

#include "helmscale/error.hpp"

namespace helmscale {

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::mpi: return "MPI";
    case Category::usr: return "USR";
    case Category::com: return "COM";
  }
  return "?";
}

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::setup: return "setup";
    case Phase::step: return "step";
    case Phase::solver: return "solver";
    case Phase::io: return "io";
  }
  return "?";
}

PhaseCounters& PhaseCounters::operator+=(const PhaseCounters& o) noexcept {
  n_sendrecv += o.n_sendrecv;
  n_allreduce += o.n_allreduce;
  bytes_sent += o.bytes_sent;
  n_cross_plane += o.n_cross_plane;
  ns_sendrecv += o.ns_sendrecv;
  ns_allreduce += o.ns_allreduce;
  return *this;
}

PhaseCounters TimingReport::totals() const noexcept {
  PhaseCounters t;
  for (const auto& p : phases) t += p;
  return t;
}

std::int64_t TimingReport::identity_gap() const noexcept {
  return std::llabs(ns_mpi + ns_usr + ns_com - ns_total);
}

TimingReport TimingReport::merge(std::span<const TimingReport> ranks) {
  TimingReport out;
  if (ranks.empty()) return out;
  const auto critical = std::max_element(
      ranks.begin(), ranks.end(),
      [](const TimingReport& a, const TimingReport& b) { return a.ns_total < b.ns_total; });
  out = *critical;
  out.phases = {};
  for (const auto& r : ranks)
    for (int p = 0; p < kPhaseCount; ++p) out.phases[p] += r.phases[p];
  // critical-rank bucket times stay; per-phase times above are summed.
  return out;
}

void TimingRecorder::begin(Category c) {
  stack_.push_back({c, now_ns(), 0});
}

void TimingRecorder::end(Category c) {
  if (stack_.empty())
    throw InstrumentationError("closing a " + std::string(to_string(c)) +
                               " span with no span open");
  if (stack_.back().category != c)
    throw InstrumentationError("closing a " + std::string(to_string(c)) +
                               " span while the innermost open span is " +
                               std::string(to_string(stack_.back().category)));
  const Frame f = stack_.back();
  stack_.pop_back();
  const std::int64_t elapsed = now_ns() - f.start;
  own_[static_cast<int>(c)] += elapsed - f.children;
  ++n_spans_;
  if (stack_.empty()) root_total_ += elapsed;
  else stack_.back().children += elapsed;
}

void TimingRecorder::abandon() noexcept {
  // exception unwinding: close without validation so the stack stays usable
  if (stack_.empty()) return;
  const Frame f = stack_.back();
  stack_.pop_back();
  const std::int64_t elapsed = now_ns() - f.start;
  own_[static_cast<int>(f.category)] += elapsed - f.children;
  ++n_spans_;
  if (stack_.empty()) root_total_ += elapsed;
  else stack_.back().children += elapsed;
}

void TimingRecorder::record_sendrecv(Phase p, std::int64_t ns, std::uint64_t bytes,
                                     bool cross_plane) {
  auto& c = phases_[static_cast<int>(p)];
  ++c.n_sendrecv;
  c.bytes_sent += bytes;
  c.ns_sendrecv += ns;
  if (cross_plane) ++c.n_cross_plane;
}

void TimingRecorder::record_allreduce(Phase p, std::int64_t ns) {
  auto& c = phases_[static_cast<int>(p)];
  ++c.n_allreduce;
  c.ns_allreduce += ns;
}

void TimingRecorder::restart() {
  const std::int64_t t = now_ns();
  for (auto& f : stack_) {
    f.start = t;
    f.children = 0;
  }
  own_ = {};
  root_total_ = 0;
  ns_io_ = 0;
  n_spans_ = 0;
  phases_ = {};
}

TimingReport TimingRecorder::report() const {
  if (!stack_.empty())
    throw InstrumentationError(std::to_string(stack_.size()) +
                               " span(s) still open when the report was taken");
  TimingReport r;
  r.ns_total = root_total_;
  r.ns_mpi = own_[static_cast<int>(Category::mpi)];
  r.ns_usr = own_[static_cast<int>(Category::usr)];
  r.ns_com = own_[static_cast<int>(Category::com)];
  r.ns_io = ns_io_;
  r.n_spans = n_spans_;
  r.phases = phases_;
  for (const auto& p : phases_) {
    r.ns_sendrecv += p.ns_sendrecv;
    r.ns_allreduce += p.ns_allreduce;
  }
  return r;
}

}  // namespace helmscale
