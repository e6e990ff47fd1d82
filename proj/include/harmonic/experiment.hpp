#pragma once

// Built-in protocols, config-driven runs, parameter sweeps and kernel calibration.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harmonic/config.hpp"
#include "harmonic/metrics.hpp"
#include "harmonic/output.hpp"
#include "harmonic/trace.hpp"

namespace harmonic {

struct RunResult {
  ExperimentSpec spec;
  Trace trace;
  ExperimentReport report;
};

/// Generic metrics and verdicts for a finished run (see AnalysisSpec).
[[nodiscard]] auto analyze(const ExperimentSpec& spec, const Trace& trace) -> ExperimentReport;

/// Validates, simulates and analyzes one spec. DivergenceError propagates.
[[nodiscard]] auto run_spec(const ExperimentSpec& spec) -> RunResult;

/// Report of a named experiment plus every run behind it. `labels[k]` names
/// `runs[k]` in output file names.
struct ExperimentOutcome {
  ExperimentReport report;
  std::vector<std::string> labels;
  std::vector<RunResult> runs;
};

namespace builtin {

/// Ring, calibrated kernel, unit rate cap, bump at node 0, v = +1 over [200, 800) ms,
/// 1000 ms, step-clock shifting.
[[nodiscard]] auto rotation_180(std::uint64_t seed = 0) -> ExperimentSpec;

/// Torus, calibrated kernel at scale 0.2, no rate cap, cosine pinning. Axis 1 moves
/// six nodes over [200, 800) ms, then axis 2 three nodes over [1000, 1300) ms.
[[nodiscard]] auto torus_independence(std::uint64_t seed = 0) -> ExperimentSpec;

/// Torus run held at `pin` with no motion.
[[nodiscard]] auto compositional_pin(TorusCoord pin, std::uint64_t seed = 0) -> ExperimentSpec;

/// Ring, no motion, 2200 ms, for the given kernel and cap.
[[nodiscard]] auto stability(const KernelParams& kernel, std::optional<double> rate_cap,
                             double kernel_scale = 1.0, std::uint64_t seed = 0) -> ExperimentSpec;

}  // namespace builtin

[[nodiscard]] auto experiment_rotation_180(std::uint64_t seed = 0) -> ExperimentOutcome;
[[nodiscard]] auto experiment_torus_independence(std::uint64_t seed = 0) -> ExperimentOutcome;
[[nodiscard]] auto experiment_compositional_points(TorusCoord pin_a = {NodeIndex{0}, NodeIndex{0}},
                                                   TorusCoord pin_b = {NodeIndex{0}, NodeIndex{3}},
                                                   std::uint64_t seed = 0) -> ExperimentOutcome;
[[nodiscard]] auto experiment_bump_stability(std::uint64_t seed = 0) -> ExperimentOutcome;

/// Persistence of a bump after release under `spec` (usually a builtin::stability
/// spec). Divergence is reported as `diverged = true` with a failed verdict.
[[nodiscard]] auto assess_persistence(const ExperimentSpec& spec) -> ExperimentReport;

/// "rotation-180", "torus-independence", "compositional" or "stability".
/// Throws ValidationError on any other name.
[[nodiscard]] auto run_named_experiment(std::string_view name, std::uint64_t seed = 0)
    -> ExperimentOutcome;

/// Writes `<label>.trace.csv` and `<label>.config.json` per run and
/// `<experiment>.report.json` into `dir`.
auto write_outcome(const ExperimentOutcome& outcome, const std::filesystem::path& dir) -> OutputBundle;

/// Loads, validates and runs a config; writes the bundle into `out_dir` (or the
/// config's output_dir). `seed` overrides the config seed.
auto run_from_config(const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir,
                     std::optional<std::uint64_t> seed = std::nullopt)
    -> std::pair<OutputBundle, ExperimentOutcome>;

struct SweepRow {
  std::string value;       // JSON text of the substituted value
  std::string status;      // "ok", "diverged" or "invalid: <reason>"
  bool persistent = false;
  long long final_index = -1;
  double amplitude_mean = 0.0;
  double amplitude_cv = 0.0;
};

/// One run per value with `dotted_key` replaced in the resolved base config. Rows
/// keep the order of `values`; runs may execute concurrently. Throws ConfigError
/// when the key does not exist. Each run writes into `out_dir/<index>` when set.
[[nodiscard]] auto sweep(const ExperimentSpec& base, const std::string& dotted_key,
                         const std::vector<std::string>& values,
                         std::optional<std::filesystem::path> out_dir = std::nullopt,
                         unsigned threads = 0) -> std::vector<SweepRow>;

[[nodiscard]] auto sweep_csv(const std::vector<SweepRow>& rows) -> std::string;

/// Row a sweep would produce for an already analyzed run.
[[nodiscard]] auto sweep_row(const std::string& value, const ExperimentReport& report) -> SweepRow;

// ---------------------------------------------------------------------------
// Ring kernel calibration

struct CalibrationGrid {
  std::vector<double> j_exc;
  std::vector<double> sigma_exc;

  /// j_exc in {2.00, 2.25, ..., 4.00}, sigma_exc in {0.8, 0.9, ..., 2.0}.
  [[nodiscard]] static auto standard() -> CalibrationGrid;
};

struct CalibrationCandidate {
  KernelParams params;
  double deviation = 0.0;
  bool persistent = false;  // bump survives release for 2000+ ms without drift
  bool steerable = false;   // rotation protocol passes every trajectory check
  bool diverged = false;

  [[nodiscard]] auto accepted() const -> bool { return persistent && steerable; }
};

struct CalibrationResult {
  std::vector<CalibrationCandidate> candidates;  // grid order, j_exc major
  std::optional<std::size_t> selected;

  [[nodiscard]] auto best() const -> const CalibrationCandidate*;
};

/// |dJ_exc| / J_exc + |dsigma_exc| / sigma_exc relative to `reference`.
[[nodiscard]] auto parameter_deviation(const KernelParams& p, const KernelParams& reference) -> double;

[[nodiscard]] auto evaluate_candidate(const KernelParams& p, double rate_cap) -> CalibrationCandidate;

/// Evaluates every grid point (J_inh and sigma_inh fixed at the published values)
/// and selects the accepted candidate with the smallest deviation from the
/// published set; ties go to the earlier grid point.
[[nodiscard]] auto calibrate_ring_kernel(const CalibrationGrid& grid = CalibrationGrid::standard(),
                                         double rate_cap = 1.0, unsigned threads = 0)
    -> CalibrationResult;

}  // namespace harmonic
