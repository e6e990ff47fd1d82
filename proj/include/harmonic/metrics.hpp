#pragma once

// Decoders and the quantitative checks run over traces: trajectory accuracy,
// drift, convergence time and amplitude stability.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "harmonic/navigation.hpp"
#include "harmonic/topology.hpp"
#include "harmonic/trace.hpp"

namespace harmonic {

inline constexpr double kDegreesPerNode = 30.0;

/// 30 degrees times the argmax node. Throws NoBumpError on a silent field.
[[nodiscard]] auto decode_angle(std::span<const double> rates) -> double;

/// Per-axis 30 degrees times the grid argmax (row-major ties).
[[nodiscard]] auto decode_torus(std::span<const double> rates) -> std::pair<double, double>;

/// Circular mean of node angles weighted by rate, in [0, 360). Diagnostic only.
[[nodiscard]] auto decode_population_vector(std::span<const double> rates) -> double;

/// Harmonic distance on the ring; larger of the two per-axis distances on the torus.
[[nodiscard]] auto position_distance(Topology topology, std::size_t a, std::size_t b) -> int;

struct ScheduleWindow {
  double start_ms = 0.0;
  double end_ms = 0.0;
  std::size_t expected = 0;  // flat node index

  friend auto operator==(const ScheduleWindow&, const ScheduleWindow&) -> bool = default;
};

/// Expected decoded position over time as contiguous windows. Every window start
/// is a transition instant (the first one is bump onset); samples within
/// `transition_tolerance_ms` of one are not scored.
struct IntendedSchedule {
  std::vector<ScheduleWindow> windows;
  double transition_tolerance_ms = 20.0;

  /// Throws ValidationError unless windows are non-empty, contiguous, ordered,
  /// and each outlives the tolerance bands at its ends.
  void validate() const;

  /// Expected position at t; empty inside a transition band.
  /// Throws WindowError when t lies outside the schedule.
  [[nodiscard]] auto expected_at(double t_ms) const -> std::optional<std::size_t>;

  /// Same schedule with every expected position translated by (di, dj).
  [[nodiscard]] auto rotated(Topology topology, long long di, long long dj = 0) const
      -> IntendedSchedule;

  friend auto operator==(const IntendedSchedule&, const IntendedSchedule&) -> bool = default;
};

/// Schedule implied by path-integrating `profile` from `center`: on each axis the
/// expected node is the nearest node to the integrated displacement, so the node
/// changes where the displacement crosses a half-node.
[[nodiscard]] auto intended_schedule(Topology topology, std::size_t center,
                                     const VelocityProfile& profile, double duration_ms,
                                     double transition_tolerance_ms = 20.0) -> IntendedSchedule;

/// Fraction of scored samples whose decoded position equals the schedule.
/// Throws WindowError when a sample lies outside the schedule or none is scored.
[[nodiscard]] auto accuracy(const Trace& trace, const IntendedSchedule& sched) -> double;

/// Largest position_distance between a decoded sample in [start, end] and the
/// decoded sample at the window start. Throws WindowError on an empty window and
/// NoBumpError when a sample in it has no bump.
[[nodiscard]] auto drift(const Trace& trace, double window_start_ms,
                         double window_end_ms = std::numeric_limits<double>::infinity()) -> int;

/// Earliest sample time after which, up to `horizon_end_ms`, the bump amplitude
/// varies by less than `rel_tol` (relative to the window maximum) within every
/// `window_ms` sliding window and the decoded position stays fixed.
/// Throws NoConvergenceError when no such time exists.
[[nodiscard]] auto convergence_time(const Trace& trace, double rel_tol, double horizon_end_ms,
                                    double window_ms = 50.0) -> double;

struct AmplitudeStats {
  double mean = 0.0;
  double cv = 0.0;  // population standard deviation over mean
};

/// Mean and coefficient of variation of the max rate over samples in [start, end].
[[nodiscard]] auto amplitude_stats(const Trace& trace, double start_ms, double end_ms)
    -> AmplitudeStats;

/// Decoded positions with consecutive repeats collapsed; silent samples skipped.
[[nodiscard]] auto decoded_sequence(const Trace& trace, double start_ms = 0.0,
                                    double end_ms = std::numeric_limits<double>::infinity())
    -> std::vector<std::size_t>;

using MetricValue = std::variant<bool, long long, double, std::string>;

/// Named metrics and verdicts of one experiment, in insertion order.
class ExperimentReport {
 public:
  explicit ExperimentReport(std::string experiment = {}) : experiment_(std::move(experiment)) {}

  void set_metric(const std::string& name, MetricValue value);
  void set_verdict(const std::string& name, bool pass);
  void set_threshold(const std::string& name, double value);

  [[nodiscard]] auto experiment() const -> const std::string& { return experiment_; }
  [[nodiscard]] auto metrics() const -> const std::vector<std::pair<std::string, MetricValue>>& {
    return metrics_;
  }
  [[nodiscard]] auto verdicts() const -> const std::vector<std::pair<std::string, bool>>& {
    return verdicts_;
  }
  [[nodiscard]] auto thresholds() const -> const std::vector<std::pair<std::string, double>>& {
    return thresholds_;
  }

  [[nodiscard]] auto metric(const std::string& name) const -> std::optional<MetricValue>;
  [[nodiscard]] auto number(const std::string& name) const -> double;
  [[nodiscard]] auto verdict(const std::string& name) const -> bool;
  [[nodiscard]] auto has_verdict(const std::string& name) const -> bool;

  /// True when every verdict passes.
  [[nodiscard]] auto passed() const -> bool;

  std::uint64_t seed = 0;
  int trials = 1;

 private:
  std::string experiment_;
  std::vector<std::pair<std::string, MetricValue>> metrics_;
  std::vector<std::pair<std::string, bool>> verdicts_;
  std::vector<std::pair<std::string, double>> thresholds_;
};

}  // namespace harmonic
