#pragma once

// External inputs that move the bump: the asymmetric shift input on the ring and
// the phase-driven cosine pinning input on the torus.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "harmonic/attractor.hpp"
#include "harmonic/topology.hpp"

namespace harmonic {

/// One profile unit of velocity moves the bump one node per 100 ms.
inline constexpr double kEpochMs = 100.0;
inline constexpr double kNodesPerSecondPerUnit = 1000.0 / kEpochMs;

/// Constant velocity `v` (profile units, signed) on `axis` over [t_start_ms, t_end_ms).
/// Axis 1 is the fifths axis; axis 2 (fourths) exists only on the torus.
struct VelocitySegment {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
  double v = 0.0;
  int axis = 1;

  friend auto operator==(const VelocitySegment&, const VelocitySegment&) -> bool = default;
};

struct VelocityProfile {
  std::vector<VelocitySegment> segments;

  /// Throws ValidationError for empty or reversed segments, segments outside
  /// [0, duration_ms], overlaps on one axis, or an axis the topology lacks.
  void validate(Topology topology, double duration_ms) const;

  /// v on `axis` at time t (0 outside every segment).
  [[nodiscard]] auto velocity(double t_ms, int axis = 1) const -> double;

  /// Signed displacement in nodes, the integral of v over [0, t] divided by 100 ms.
  [[nodiscard]] auto displacement(double t_ms, int axis = 1) const -> double;

  /// Signed number of step-clock epochs started by time t on `axis`. A segment
  /// opens an epoch at its start and another every 100/|v| ms while it lasts.
  [[nodiscard]] auto epochs_started(double t_ms, int axis = 1) const -> long long;

  /// Start of the earliest segment, or `fallback` when the profile is empty.
  [[nodiscard]] auto first_motion_ms(double fallback) const -> double;

  friend auto operator==(const VelocityProfile&, const VelocityProfile&) -> bool = default;
};

/// Unwrapped phases of the two torus axes, in radians.
struct PhaseState {
  double theta1 = 0.0;
  double theta2 = 0.0;

  /// Phase of `axis` reduced to [0, 2 pi).
  [[nodiscard]] auto wrapped(int axis) const -> double;
  /// Node nearest to the phase of `axis`.
  [[nodiscard]] auto nearest_node(int axis) const -> NodeIndex;

  /// Phases that pin the bump on `c`.
  [[nodiscard]] static auto at(TorusCoord c) -> PhaseState;
};

struct ShiftGain {
  double i_shift = 0.8;
};

/// argmax of the rates, lowest index on ties. Throws NoBumpError when no rate is > 0.
[[nodiscard]] auto bump_position(std::span<const double> rates) -> std::size_t;
[[nodiscard]] auto bump_position(Topology topology, std::span<const double> rates) -> TorusCoord;

/// +I_shift v at the node after the bump and -I_shift v at the node before it.
[[nodiscard]] auto shift_input_1d(std::span<const double> rates, double v, ShiftGain g) -> Field;

/// Advances each phase by (2 pi / 12) v dt, with v in nodes per second.
[[nodiscard]] auto integrate_phase(PhaseState ph, double v1_nodes_per_s, double v2_nodes_per_s,
                                   double dt_ms) -> PhaseState;

/// I0 cos(theta1 - 2 pi i / 12) + I0 cos(theta2 - 2 pi j / 12) on the 12x12 grid.
[[nodiscard]] auto torus_input(PhaseState ph, double i0) -> Field;

/// Phases after following `profile` from `initial` up to time t.
[[nodiscard]] auto phase_at(const VelocityProfile& profile, PhaseState initial, double t_ms)
    -> PhaseState;

enum class NavigationMode : std::uint8_t { Shift1D, Phase2D };

/// How the ring shift input is gated.
///  - StepClock: during an active segment, the shift input is applied only while the
///    bump sits away from the step-clock target (init center plus epochs started).
///  - Continuous: the shift input is applied whenever v != 0.
enum class ShiftMode : std::uint8_t { StepClock, Continuous };

struct NavigationGains {
  double i_shift = 0.8;
  double i0 = 0.8;
  ShiftMode shift_mode = ShiftMode::StepClock;

  friend auto operator==(const NavigationGains&, const NavigationGains&) -> bool = default;
};

/// Gaussian bump clamped as external input over [0, hold_ms).
struct BumpInit {
  std::size_t center = 0;  // flat node index
  double width_nodes = 1.0;
  double amplitude = 1.0;
  double hold_ms = 100.0;

  friend auto operator==(const BumpInit&, const BumpInit&) -> bool = default;
};

/// Binds the profile to the per-step input constructors and adds the hold-window
/// bump. The returned schedule is a pure function of (t, rates).
///
/// In Shift1D mode the result is zero outside all segments once the hold window
/// has passed. In Phase2D mode the cosine pinning input is always present, with
/// phases starting on the init center.
///
/// Throws ValidationError when the mode does not fit the topology or the profile
/// uses an axis the topology lacks.
[[nodiscard]] auto schedule_input(Topology topology, const VelocityProfile& profile,
                                  NavigationMode mode, const NavigationGains& gains,
                                  const BumpInit& init) -> InputSchedule;

}  // namespace harmonic
