#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "edmloc/harness.hpp"

namespace edmloc {

/// Shortest round-trip decimal representation; deterministic for a given
/// value, unlike stream formatting which depends on ambient precision flags.
inline std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

/// Per-trial rows: method,ratio,trial,msle,iterations,converged,wall_ms.
/// Wall time is written only when include_timing is set; otherwise the column
/// holds 0 so repeated runs produce identical bytes.
inline void write_trial_csv(const ExperimentReport& report, const std::string& path,
                            bool include_timing = false) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "method,ratio,trial,msle,iterations,converged,wall_ms\n";
  for (const auto& t : report.trials) {
    out << method_name(t.method) << ',' << format_double(t.ratio) << ',' << t.trial
        << ',' << (t.failed ? "failed" : format_double(t.msle)) << ',' << t.iterations
        << ',' << (t.converged ? "true" : "false") << ','
        << (include_timing ? t.wall_ms : 0) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

/// Aggregate rows: method,ratio,mean_msle,median_msle,std_msle,n_trials,n_failed.
inline void write_aggregate_csv(const ExperimentReport& report,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "method,ratio,mean_msle,median_msle,std_msle,n_trials,n_failed\n";
  for (const auto& c : report.cells) {
    out << method_name(c.method) << ',' << format_double(c.ratio) << ','
        << format_double(c.mean_msle) << ',' << format_double(c.median_msle) << ','
        << format_double(c.std_msle) << ',' << c.n_trials << ',' << c.n_failed << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

inline void write_scalar_series_csv(const std::vector<double>& values,
                                    const std::string& column,
                                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "index," << column << '\n';
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i << ',' << format_double(values[i]) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace edmloc
