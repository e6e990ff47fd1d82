#pragma once

// Trace CSV, report JSON and the on-disk bundle of one experiment.
//
// Trace CSV: header `t_ms,decoded_index,decoded_angle_deg,amplitude,r_0,...,r_11`
// (torus rates as r_i_j, row-major). Reals use 9 significant digits, `.` as the
// decimal separator and `\n` line endings. A sample with no bump has
// decoded_index -1 and decoded_angle_deg nan. On the torus decoded_index is the
// flat index 12 i + j and decoded_angle_deg is the fifths-axis angle 30 i.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmonic/metrics.hpp"
#include "harmonic/trace.hpp"

namespace harmonic {

/// Shortest-form "%.9g" rendering, independent of the C locale.
[[nodiscard]] auto format_real(double x) -> std::string;

[[nodiscard]] auto trace_csv(const Trace& trace) -> std::string;

/// Flat object: schema, experiment, trials, seed, passed, metrics, verdict_<name>
/// booleans, then a `thresholds` sub-object.
[[nodiscard]] auto report_json(const ExperimentReport& report) -> nlohmann::ordered_json;

struct OutputBundle {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path report;
  std::vector<std::filesystem::path> configs;
};

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace harmonic
