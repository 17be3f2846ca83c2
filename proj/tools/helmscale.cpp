// helmscale command line: run cases or series, print the case matrix, and
// compute scaling metrics from externally supplied times.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "helmscale/error.hpp"
#include "helmscale/harness.hpp"

using namespace helmscale;

namespace {

std::vector<int> parse_triple(const std::string& text, const char* what) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + what + " '" + text + "' (expected AxBxC)");
    }
  }
  if (v.size() != 3) throw ConfigError(std::string("bad ") + what + " '" + text + "' (expected AxBxC)");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep))
    if (!part.empty()) out.push_back(part);
  return out;
}

struct RunArgs {
  std::string cases = "small-thin";
  std::string grid;
  std::string solver = "mgu";
  int steps = 10;
  std::string per_core = "16x32x1";
  double tol = 1e-6;
  int max_iter = 0;
  int coarse_sweeps = 8;
  std::string io = "none";
  std::string prefix;
  int every = 100;
  std::string report;
  std::string ranks;
  int repeats = 3;
  bool allow_huge = false;
  int workers = -1;
  std::uint64_t seed = kDefaultSeed;
};

int do_run(const RunArgs& a) {
  RunConfig base;
  const auto pc = parse_triple(a.per_core, "per-core size");
  base.per_core = {pc[0], pc[1], pc[2]};
  base.solver.kind = parse_solver_kind(a.solver);
  base.solver.tol = a.tol;
  base.solver.max_iter = a.max_iter;
  base.solver.coarse_sweeps = a.coarse_sweeps;
  base.steps = a.steps;
  base.io.mode = parse_io_mode(a.io);
  base.io.prefix = a.prefix;
  base.io.every = a.every;
  base.repeats = a.repeats;
  base.allow_huge = a.allow_huge;
  base.exec.workers = a.workers;
  base.seed = a.seed;
  if (!a.ranks.empty()) {
    const auto r = parse_triple(a.ranks, "rank layout");
    base.ranks = Decomposition{r[0], r[1], r[2]};
  }

  std::vector<RunConfig> configs;
  if (!a.grid.empty()) {
    const auto g = parse_triple(a.grid, "grid");
    RunConfig c = base;
    c.grid.emplace(g[0], g[1], g[2], 1.0, static_cast<double>(g[1]) / g[0]);
    configs.push_back(c);
  } else {
    const auto names = split(a.cases, ',');
    for (const auto& n : names) {
      RunConfig c = base;
      c.case_spec = CaseSpec::parse(n);
      if (names.size() > 1 && c.io.mode != IoMode::none) c.io.prefix = a.prefix + "_" + n;
      configs.push_back(c);
    }
  }

  ScalingSeries series;
  for (const auto& c : configs) {
    series.entries.push_back(run_case(c));
    const CaseResult& e = series.entries.back();
    std::fprintf(stderr, "%s: %d ranks, %.3f s, %.2f iterations per solve%s\n", e.label.c_str(),
                 e.cores(), e.report.t_total(), e.solve.iterations_mean(),
                 e.failure ? " (not converged)" : "");
  }
  series.validate();
  std::cout << report_summary(series);
  if (!a.report.empty())
    for (const auto& path : emit_report(series, a.report)) std::cout << "wrote " << path << '\n';

  for (const auto& e : series.entries)
    if (e.failure) return 2;
  return 0;
}

int do_matrix() {
  std::printf("%-14s %6s %6s %4s %14s %7s\n", "case", "nx", "ny", "ns", "ranks", "cores");
  for (const auto& row : case_matrix()) {
    char ranks[32];
    std::snprintf(ranks, sizeof ranks, "%dx%dx%d", row.decomp.px, row.decomp.py, row.decomp.ps);
    std::printf("%-14s %6d %6d %4d %14s %7d\n", row.spec.name().c_str(), row.grid.nx(),
                row.grid.ny(), row.grid.ns(), ranks, row.cores);
  }
  return 0;
}

int do_metrics(const std::string& times_text, int skip) {
  std::vector<double> times;
  for (const auto& part : split(times_text, ',')) {
    try {
      times.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw MetricsError("bad time value '" + part + "'");
    }
  }
  const ScalingMetrics m = scaling_metrics(times, skip);
  std::printf("log10 ratios:");
  for (double v : m.log_ratios) std::printf(" %.4f", v);
  std::printf("\nln ratios:");
  for (double v : m.ln_ratios) std::printf(" %.4f", v);
  std::printf("\nmean log10 ratio: %.4f\nmean ln ratio: %.4f\nefficiency: %.4f\n",
              m.mean_log_ratio, m.mean_ln_ratio, m.efficiency);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"helmscale: Helmholtz solver weak-scaling proxy"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run one case or a comma-separated series of cases");
  run->add_option("--case", ra.cases, "case name(s), e.g. small-thin or small-thin,small-medium");
  run->add_option("--grid", ra.grid, "explicit grid NXxNYxNS instead of a case");
  run->add_option("--solver", ra.solver, "dummy, cg, mgv or mgu");
  run->add_option("--steps", ra.steps, "time steps");
  run->add_option("--per-core", ra.per_core, "points per rank CXxCYxCS");
  run->add_option("--tol", ra.tol, "relative residual tolerance");
  run->add_option("--max-iter", ra.max_iter, "iteration/cycle limit (0: solver default)");
  run->add_option("--coarse-sweeps", ra.coarse_sweeps, "smoothing passes on the coarsest level");
  run->add_option("--io", ra.io, "none, single or multifile");
  run->add_option("--prefix", ra.prefix, "snapshot path (single) or prefix (multifile)");
  run->add_option("--snapshot-every", ra.every, "steps between snapshots");
  run->add_option("--report", ra.report, "CSV report path (SVG and summary written alongside)");
  run->add_option("--ranks", ra.ranks, "override decomposition PXxPYxPS");
  run->add_option("--repeats", ra.repeats, "repetitions; the median run is reported");
  run->add_flag("--allow-huge", ra.allow_huge, "lift the 4096-rank cap");
  run->add_option("--workers", ra.workers, "execution threads (0: one per rank)");
  run->add_option("--seed", ra.seed, "initial-condition seed");

  app.add_subcommand("matrix", "print the nine-case table");

  std::string times;
  int skip = 0;
  auto* metrics = app.add_subcommand("metrics", "scaling metrics from given times");
  metrics->add_option("--times", times, "comma-separated times in core order")->required();
  metrics->add_option("--skip", skip, "leading entries to ignore");

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return do_run(ra);
    if (app.got_subcommand("matrix")) return do_matrix();
    if (*metrics) return do_metrics(times, skip);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "helmscale: %s\n", e.what());
    return 1;
  }
  return 1;
}
