#pragma once

// Experiment specifications and their JSON config representation.
//
// Config files are a single JSON object whose nested keys mirror ExperimentSpec.
// Omitted keys take the defaults below; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmonic/attractor.hpp"
#include "harmonic/metrics.hpp"
#include "harmonic/navigation.hpp"
#include "harmonic/topology.hpp"

namespace harmonic {

/// Names of the checks `analyze` can turn into verdicts.
namespace check {
inline constexpr const char* kAccuracy = "accuracy";
inline constexpr const char* kFinalPosition = "final_position";
inline constexpr const char* kSequence = "sequence";
inline constexpr const char* kDrift = "drift";
inline constexpr const char* kConvergence = "convergence";
inline constexpr const char* kAmplitudeCv = "amplitude_cv";
inline constexpr const char* kPersistence = "persistence";
}  // namespace check

/// Windows and thresholds used to turn a trace into verdicts.
struct AnalysisSpec {
  double convergence_rel_tol = 0.01;
  double convergence_window_ms = 50.0;
  double max_convergence_ms = 100.0;
  double min_accuracy = 1.0;
  double max_amplitude_cv = 0.05;
  /// Fraction of the release amplitude that must remain at the end of the run.
  double min_persistence_ratio = 0.5;
  /// Defaults: drift from the end of the last segment (or the hold window) to the
  /// end of the run; amplitude over the motion window (or after the hold window).
  std::optional<double> drift_window_start_ms;
  std::optional<double> amplitude_window_start_ms;
  std::optional<double> amplitude_window_end_ms;
  std::vector<std::string> checks{check::kAccuracy,    check::kFinalPosition, check::kSequence,
                                  check::kDrift,       check::kConvergence,   check::kAmplitudeCv,
                                  check::kPersistence};

  friend auto operator==(const AnalysisSpec&, const AnalysisSpec&) -> bool = default;
};

struct ExperimentSpec {
  std::string name = "custom";
  Topology topology = Topology::ring();
  KernelParams kernel = KernelParams::calibrated();
  double kernel_scale = 1.0;
  DynamicsParams dynamics{10.0, 0.1, 1.0, 0.0};
  BumpInit init;
  VelocityProfile velocity;
  NavigationMode mode = NavigationMode::Shift1D;
  NavigationGains gains;
  double duration_ms = 1000.0;
  double sample_every_ms = 1.0;
  /// Explicit windows; derived from the profile when absent.
  std::optional<std::vector<ScheduleWindow>> schedule_windows;
  double transition_tolerance_ms = 20.0;
  AnalysisSpec analysis;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  /// Explicit windows if given, otherwise the path-integrated schedule.
  [[nodiscard]] auto schedule() const -> IntendedSchedule;

  friend auto operator==(const ExperimentSpec&, const ExperimentSpec&) -> bool = default;
};

/// Parses config text. Throws ConfigError with line/column or key path on
/// malformed JSON, unknown keys, or wrongly typed values. Does not validate.
[[nodiscard]] auto parse_config(const std::string& text) -> ExperimentSpec;
[[nodiscard]] auto parse_config(const nlohmann::json& doc) -> ExperimentSpec;
[[nodiscard]] inline auto parse_config(const char* text) -> ExperimentSpec { return parse_config(std::string(text)); }
[[nodiscard]] auto load_config(const std::filesystem::path& path) -> ExperimentSpec;

/// Fully resolved config (every key present, schedule windows explicit).
[[nodiscard]] auto to_json(const ExperimentSpec& spec) -> nlohmann::ordered_json;
[[nodiscard]] auto to_config_text(const ExperimentSpec& spec) -> std::string;

/// Replaces the value at a dotted key path ("kernel.j_exc", "velocity.0.v").
/// Throws ConfigError when the path does not exist in `doc`.
void set_dotted(nlohmann::ordered_json& doc, const std::string& dotted_key,
                const nlohmann::ordered_json& value);

[[nodiscard]] auto to_string(NavigationMode mode) -> std::string;
[[nodiscard]] auto to_string(ShiftMode mode) -> std::string;

}  // namespace harmonic
