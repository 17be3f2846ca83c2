#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helmscale/error.hpp"
#include "helmscale/harness.hpp"

namespace helmscale {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<double> log_ratio_column(const ScalingSeries& series) {
  std::vector<double> col(series.entries.size(), std::nan(""));
  if (series.entries.size() < 2) return col;
  const std::vector<double> totals = series.totals();
  for (double t : totals)
    if (!(t > 0.0)) return col;
  const ScalingMetrics m = scaling_metrics(totals);
  for (std::size_t i = 0; i < m.log_ratios.size(); ++i) col[i + 1] = m.log_ratios[i];
  return col;
}

}  // namespace

std::string report_csv(const ScalingSeries& series, const ReportOptions& opts) {
  std::ostringstream out;
  out << "label,cores,solver,steps,t_total,t_mpi,t_usr,t_com,t_sendrecv,t_allreduce,"
         "n_sendrecv,n_allreduce,bytes,iters_mean,log_ratio\n";
  const std::vector<double> ratios = log_ratio_column(series);
  auto time = [&](double t) { return opts.mask_times ? std::string("-") : fmt("%.6f", t); };
  for (std::size_t i = 0; i < series.entries.size(); ++i) {
    const CaseResult& e = series.entries[i];
    const TimingReport& r = e.report;
    out << e.label << ',' << e.cores() << ',' << to_string(e.solver) << ',' << e.steps << ','
        << time(r.t_total()) << ',' << time(r.t_mpi()) << ',' << time(r.t_usr()) << ','
        << time(r.t_com()) << ',' << time(r.t_sendrecv()) << ',' << time(r.t_allreduce())
        << ',' << r.n_sendrecv() << ',' << r.n_allreduce() << ',' << r.bytes_sent() << ','
        << fmt("%.3f", e.solve.iterations_mean()) << ',';
    if (!std::isnan(ratios[i])) out << (opts.mask_times ? std::string("-") : fmt("%.6f", ratios[i]));
    out << '\n';
  }
  return out.str();
}

std::string report_svg(const ScalingSeries& series) {
  constexpr double W = 640, H = 400, L = 70, R = 130, T = 30, B = 50;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const auto& es = series.entries;
  if (es.empty()) {
    out << "</svg>\n";
    return out.str();
  }

  double x_lo = std::log2(es.front().cores()), x_hi = std::log2(es.back().cores());
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  double y_hi = 0;
  for (const auto& e : es) y_hi = std::max(y_hi, e.report.t_total());
  if (y_hi <= 0) y_hi = 1;
  auto px = [&](double cores) { return L + (std::log2(cores) - x_lo) / (x_hi - x_lo) * (W - L - R); };
  auto py = [&](double t) { return H - B - t / y_hi * (H - T - B); };

  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (const auto& e : es) {
    const double x = px(e.cores());
    out << "<text x=\"" << x << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << e.cores() << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double t = y_hi * k / 4;
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
        << fmt("%.3g", t) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">cores (log2)</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\" text-anchor=\"middle\">time [s]</text>\n";

  struct Curve {
    const char* name;
    const char* colour;
    double (TimingReport::*get)() const noexcept;
  };
  const Curve curves[] = {{"total", "black", &TimingReport::t_total},
                          {"MPI", "#d62728", &TimingReport::t_mpi},
                          {"USR", "#1f77b4", &TimingReport::t_usr},
                          {"COM", "#2ca02c", &TimingReport::t_com}};
  int row = 0;
  for (const Curve& c : curves) {
    out << "<polyline fill=\"none\" stroke=\"" << c.colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& e : es) out << px(e.cores()) << ',' << py((e.report.*c.get)()) << ' ';
    out << "\"/>\n";
    const double ly = T + 14 + 18 * row++;
    out << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 36
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << c.colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - R + 42 << "\" y=\"" << ly << "\">" << c.name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string report_summary(const ScalingSeries& series) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %7s %6s %10s %10s %10s %10s %9s %s\n", "case", "cores",
                "solver", "t_total", "t_mpi", "t_usr", "t_com", "iters", "status");
  out << line;
  for (const auto& e : series.entries) {
    const TimingReport& r = e.report;
    std::snprintf(line, sizeof line, "%-14s %7d %6s %10.4f %10.4f %10.4f %10.4f %9.2f %s\n",
                  e.label.c_str(), e.cores(), std::string(to_string(e.solver)).c_str(),
                  r.t_total(), r.t_mpi(), r.t_usr(), r.t_com(), e.solve.iterations_mean(),
                  e.failure ? "NOT CONVERGED" : "ok");
    out << line;
  }
  const std::vector<double> totals = series.totals();
  if (totals.size() >= 2 &&
      std::all_of(totals.begin(), totals.end(), [](double t) { return t > 0; })) {
    const ScalingMetrics m = scaling_metrics(totals);
    out << "log10 ratios:";
    for (double v : m.log_ratios) out << ' ' << fmt("%.4f", v);
    out << "\nmean log10 ratio " << fmt("%.4f", m.mean_log_ratio) << ", mean ln ratio "
        << fmt("%.4f", m.mean_ln_ratio) << ", efficiency " << fmt("%.4f", m.efficiency) << '\n';
  }
  return out.str();
}

std::vector<std::string> emit_report(const ScalingSeries& series, const std::string& path,
                                     const ReportOptions& opts) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  const std::string svg = std::filesystem::path(p).replace_extension(".svg").string();
  const std::string txt = std::filesystem::path(p).replace_extension(".txt").string();
  write_text(path, report_csv(series, opts));
  write_text(svg, report_svg(series));
  write_text(txt, report_summary(series));
  return {path, svg, txt};
}

}  // namespace helmscale
