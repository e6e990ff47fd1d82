#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "harmonic/topology.hpp"

namespace harmonic {

/// Per-node real field (rates or external input), indexed by flat node index.
using Field = std::vector<double>;

/// Index of the largest entry, lowest index on ties. Empty when no entry is > 0.
[[nodiscard]] auto peak_index(std::span<const double> rates) -> std::optional<std::size_t>;

struct TraceSample {
  double t_ms = 0.0;
  Field rates;
  std::optional<std::size_t> decoded;  // peak_index(rates)
  double amplitude = 0.0;              // max rate
};

/// Time-sampled record of a run. Samples are strictly increasing in time.
class Trace {
 public:
  Trace(Topology topology, double dt_ms) : topology_(topology), dt_ms_(dt_ms) {}

  /// Appends a snapshot; decoded position and amplitude are derived from the rates.
  void record(double t_ms, Field rates);

  [[nodiscard]] auto topology() const -> Topology { return topology_; }
  [[nodiscard]] auto dt_ms() const -> double { return dt_ms_; }
  [[nodiscard]] auto samples() const -> const std::vector<TraceSample>& { return samples_; }
  [[nodiscard]] auto size() const -> std::size_t { return samples_.size(); }
  [[nodiscard]] auto empty() const -> bool { return samples_.empty(); }
  [[nodiscard]] auto operator[](std::size_t i) const -> const TraceSample& { return samples_[i]; }
  [[nodiscard]] auto back() const -> const TraceSample& { return samples_.back(); }

  /// Samples with window_start <= t <= window_end.
  [[nodiscard]] auto window(double start_ms, double end_ms) const -> std::span<const TraceSample>;

 private:
  Topology topology_;
  double dt_ms_;
  std::vector<TraceSample> samples_;
};

}  // namespace harmonic
