#include "helmscale/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helmscale/error.hpp"
#include "helmscale/helmholtz.hpp"

namespace helmscale {

std::vector<CaseRow> case_matrix() {
  std::vector<CaseRow> rows;
  for (const CaseSpec& spec : all_cases()) {
    const GlobalGrid g = case_grid(spec);
    const Decomposition d = default_decomposition(g);
    rows.push_back({spec, g, d, d.total()});
  }
  return rows;
}

std::string RunConfig::label() const {
  if (case_spec) return case_spec->name();
  if (grid)
    return std::to_string(grid->nx()) + "x" + std::to_string(grid->ny()) + "x" +
           std::to_string(grid->ns());
  return "unnamed";
}

void RunConfig::validate() const {
  if (!case_spec && !grid) throw ConfigError("run needs a case or an explicit grid");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (per_core.cx < 1 || per_core.cy < 1 || per_core.cs < 1)
    throw ConfigError("per-core sizes must be positive");
  solver.validate();
  io.validate();
}

Layout resolve_layout(const RunConfig& cfg) {
  cfg.validate();
  std::optional<GlobalGrid> grid;
  std::optional<Decomposition> decomp;
  if (cfg.case_spec) {
    const Decomposition d = default_decomposition(case_grid(*cfg.case_spec));
    const int nx = d.px * cfg.per_core.cx, ny = d.py * cfg.per_core.cy;
    grid.emplace(nx, ny, d.ps * cfg.per_core.cs, 1.0, static_cast<double>(ny) / nx);
    decomp = d;
  } else {
    grid = cfg.grid;
    if (!cfg.ranks) decomp = default_decomposition(*grid, cfg.per_core);
  }
  if (cfg.ranks) decomp = make_decomposition(*grid, cfg.ranks->px, cfg.ranks->py, cfg.ranks->ps);
  if (decomp->total() > cfg.max_ranks && !cfg.allow_huge)
    throw ConfigError(cfg.label() + " needs " + std::to_string(decomp->total()) +
                      " ranks, above the cap of " + std::to_string(cfg.max_ranks) +
                      " (pass allow_huge to override)");
  return {*grid, *decomp};
}

void SolveAggregate::add(const SolveStats& s) {
  ++solves;
  iterations += s.iterations;
  max_residual = std::max(max_residual, s.residual);
  all_converged = all_converged && s.converged;
  if (level_sweeps.size() < s.level_sweeps.size()) level_sweeps.resize(s.level_sweeps.size(), 0);
  for (std::size_t l = 0; l < s.level_sweeps.size(); ++l) level_sweeps[l] += s.level_sweeps[l];
}

std::int64_t CaseResult::step_sendrecv_per_rank() const {
  if (rank_reports.empty()) return -1;
  const auto n = rank_reports.front().phase(Phase::step).n_sendrecv;
  for (const auto& r : rank_reports)
    if (r.phase(Phase::step).n_sendrecv != n) return -1;
  return static_cast<std::int64_t>(n);
}

namespace {

struct RankOutcome {
  SolveAggregate solve;
  std::vector<std::string> files;
};

RankOutcome run_program(RankContext& ctx, const RunConfig& cfg) {
  Coefficients coeff = default_coefficients(ctx);
  FieldSolver solver(ctx, coeff, cfg.solver);
  State st = initial_state(ctx, cfg.seed, cfg.dt, cfg.kappa);
  ctx.timer().restart();

  RankOutcome out;
  for (int s = 1; s <= cfg.steps; ++s) {
    out.solve.add(step(ctx, st, solver));
    if (cfg.io.mode == IoMode::none) continue;
    if (s % cfg.io.every != 0 && s != cfg.steps) continue;
    const auto idx = static_cast<std::uint64_t>(st.step);
    if (cfg.io.mode == IoMode::single) {
      write_single(ctx, st.f, cfg.io.prefix, idx);
      if (ctx.rank() == 0) out.files = {cfg.io.prefix};
    } else {
      out.files = write_multifile(ctx, st.f, cfg.io.prefix, idx);
    }
  }
  return out;
}

}  // namespace

CaseResult run_case(const RunConfig& cfg) {
  const Layout layout = resolve_layout(cfg);

  struct Attempt {
    TimingReport merged;
    std::vector<TimingReport> reports;
    SolveAggregate solve;
    std::vector<std::string> files;
  };
  std::vector<Attempt> attempts;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    auto res = run_ranks(
        layout.grid, layout.decomp, [&](RankContext& ctx) { return run_program(ctx, cfg); },
        cfg.exec);
    Attempt a;
    a.merged = res.merged;
    a.reports = std::move(res.reports);
    a.solve = res.values.front().solve;
    for (auto& v : res.values)
      for (auto& f : v.files) a.files.push_back(std::move(f));
    std::sort(a.files.begin(), a.files.end());
    if (!attempts.empty()) {
      const auto& first = attempts.front().reports;
      for (std::size_t r = 0; r < first.size(); ++r)
        if (!a.reports[r].same_counters(first[r]))
          throw InstrumentationError(cfg.label() + ": communication counters of rank " +
                                     std::to_string(r) + " differ between repeats");
    }
    attempts.push_back(std::move(a));
  }

  std::vector<std::size_t> order(attempts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return attempts[x].merged.ns_total < attempts[y].merged.ns_total;
  });
  Attempt& median = attempts[order[(order.size() - 1) / 2]];

  CaseResult out;
  out.label = cfg.label();
  out.solver = cfg.solver.kind;
  out.steps = cfg.steps;
  out.layout = layout;
  for (const auto& a : attempts) out.repeat_totals.push_back(a.merged.t_total());
  out.report = median.merged;
  out.rank_reports = std::move(median.reports);
  out.solve = median.solve;
  out.files = std::move(median.files);
  out.failure = !out.solve.all_converged;
  return out;
}

void ScalingSeries::validate() const {
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].cores() <= entries[i - 1].cores())
      throw ConfigError("scaling series needs strictly increasing core counts (" +
                        entries[i - 1].label + " -> " + entries[i].label + ")");
}

std::vector<double> ScalingSeries::totals() const {
  std::vector<double> t;
  for (const auto& e : entries) t.push_back(e.report.t_total());
  return t;
}

ScalingSeries run_series(const std::vector<RunConfig>& configs) {
  ScalingSeries s;
  for (const auto& c : configs) s.entries.push_back(run_case(c));
  s.validate();
  return s;
}

namespace {

std::vector<double> pair_log10(std::span<const double> t) {
  std::vector<double> out;
  for (std::size_t i = 1; i < t.size(); ++i) out.push_back(std::log10(t[i] / t[i - 1]));
  return out;
}

}  // namespace

ScalingMetrics scaling_metrics(std::span<const double> times, int skip_leading) {
  if (skip_leading < 0) throw MetricsError("skip count must be >= 0");
  if (times.size() < static_cast<std::size_t>(skip_leading) + 2)
    throw MetricsError("scaling metrics need at least two times after skipping " +
                       std::to_string(skip_leading));
  const auto t = times.subspan(static_cast<std::size_t>(skip_leading));
  for (double v : t)
    if (!(v > 0.0) || !std::isfinite(v))
      throw MetricsError("scaling metrics need positive finite times, got " + std::to_string(v));

  ScalingMetrics m;
  m.log_ratios = pair_log10(t);
  for (std::size_t i = 1; i < t.size(); ++i) m.ln_ratios.push_back(std::log(t[i] / t[i - 1]));
  const double n = static_cast<double>(m.log_ratios.size());
  m.mean_log_ratio = std::accumulate(m.log_ratios.begin(), m.log_ratios.end(), 0.0) / n;
  m.mean_ln_ratio = std::accumulate(m.ln_ratios.begin(), m.ln_ratios.end(), 0.0) / n;
  m.efficiency = t.front() / t.back();
  return m;
}

ScalingMetrics scaling_metrics(const ScalingSeries& series, int skip_leading) {
  series.validate();
  const std::vector<double> totals = series.totals();
  ScalingMetrics m = scaling_metrics(totals, skip_leading);
  auto sub = [&](auto get) {
    std::vector<double> v;
    for (std::size_t i = static_cast<std::size_t>(skip_leading); i < series.entries.size(); ++i)
      v.push_back(get(series.entries[i].report));
    for (double x : v)
      if (!(x > 0.0)) return std::vector<double>{};
    return pair_log10(v);
  };
  m.mpi_log_ratios = sub([](const TimingReport& r) { return r.t_mpi(); });
  m.usr_log_ratios = sub([](const TimingReport& r) { return r.t_usr(); });
  m.com_log_ratios = sub([](const TimingReport& r) { return r.t_com(); });
  return m;
}

}  // namespace helmscale
