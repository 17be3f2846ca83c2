#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "helmscale/comm.hpp"
#include "helmscale/grid.hpp"
#include "helmscale/io.hpp"
#include "helmscale/solvers.hpp"
#include "helmscale/timestep.hpp"

namespace helmscale {

struct CaseRow {
  CaseSpec spec;
  GlobalGrid grid;
  Decomposition decomp;
  int cores = 0;
};

/// The nine cases with their grids and default (64x128x1 per core) rank counts.
std::vector<CaseRow> case_matrix();

struct RunConfig {
  std::optional<CaseSpec> case_spec;
  /// Used as given when no case is set.
  std::optional<GlobalGrid> grid;
  PerCore per_core{16, 32, 1};
  /// Replaces the decomposition derived from the case.
  std::optional<Decomposition> ranks;
  SolverConfig solver;
  int steps = 10;
  IoConfig io;
  std::uint64_t seed = kDefaultSeed;
  double dt = 0.0;
  double kappa = 1.0;
  int repeats = 3;
  int max_ranks = 4096;
  bool allow_huge = false;
  ExecOptions exec;

  std::string label() const;
  void validate() const;
};

/// Grid and decomposition a config runs on. A case keeps its default rank
/// topology and gets per_core points per rank (ly = ny/nx keeps cells square).
struct Layout {
  GlobalGrid grid{2, 2, 1};
  Decomposition decomp;
};
Layout resolve_layout(const RunConfig& cfg);

struct SolveAggregate {
  std::int64_t solves = 0;
  std::int64_t iterations = 0;
  double max_residual = 0.0;
  bool all_converged = true;
  std::vector<std::int64_t> level_sweeps;

  double iterations_mean() const noexcept {
    return solves ? static_cast<double>(iterations) / static_cast<double>(solves) : 0.0;
  }
  void add(const SolveStats& s);
};

struct CaseResult {
  std::string label;
  SolverKind solver = SolverKind::mgu;
  int steps = 0;
  Layout layout;
  /// Report of the repeat with the median total time.
  TimingReport report;
  std::vector<TimingReport> rank_reports;
  SolveAggregate solve;
  std::vector<std::string> files;
  std::vector<double> repeat_totals;
  /// Some solve missed its tolerance; the run is still reported.
  bool failure = false;

  int cores() const noexcept { return layout.decomp.total(); }
  /// Time-step-phase sendrecv calls of one rank; -1 if ranks disagree.
  std::int64_t step_sendrecv_per_rank() const;
};

/// Builds the case, runs `steps` time steps under instrumentation (setup
/// excluded from the timing window), and repeats `repeats` times. Counters
/// must agree across repeats (InstrumentationError otherwise).
CaseResult run_case(const RunConfig& cfg);

struct ScalingSeries {
  std::vector<CaseResult> entries;
  /// Throws ConfigError unless core counts strictly increase.
  void validate() const;
  std::vector<double> totals() const;
};

ScalingSeries run_series(const std::vector<RunConfig>& configs);

struct ScalingMetrics {
  /// log10(t_i / t_{i-1}) per adjacent pair.
  std::vector<double> log_ratios;
  /// Natural-log variant of the same pairs.
  std::vector<double> ln_ratios;
  double mean_log_ratio = 0.0;
  double mean_ln_ratio = 0.0;
  /// t_first / t_last.
  double efficiency = 1.0;
  /// log10 pair ratios of the MPI, USR and COM sub-series (series input only).
  std::vector<double> mpi_log_ratios, usr_log_ratios, com_log_ratios;
};

/// Needs at least two positive times after dropping `skip_leading` entries;
/// MetricsError otherwise.
ScalingMetrics scaling_metrics(std::span<const double> times, int skip_leading = 0);
ScalingMetrics scaling_metrics(const ScalingSeries& series, int skip_leading = 0);

struct ReportOptions {
  /// Write times as "-" so the CSV depends on counters only.
  bool mask_times = false;
};

std::string report_csv(const ScalingSeries& series, const ReportOptions& opts = {});
std::string report_svg(const ScalingSeries& series);
std::string report_summary(const ScalingSeries& series);

/// Writes `path` (CSV), path with extension .svg, and .txt (summary).
/// Unwritable paths raise IoError.
std::vector<std::string> emit_report(const ScalingSeries& series, const std::string& path,
                                     const ReportOptions& opts = {});

}  // namespace helmscale
