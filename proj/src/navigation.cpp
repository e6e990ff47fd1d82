#include "harmonic/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "harmonic/errors.hpp"

namespace harmonic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNodeAngle = kTwoPi / kRingSize;
// Absorbs rounding in t - t_start before epoch counts are floored.
constexpr double kEpochSlack = 1e-9;

auto sign(double v) -> long long { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

void VelocityProfile::validate(Topology topology, double duration_ms) const {
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    const std::string where = "velocity segment " + std::to_string(s);
    if (seg.axis != 1 && seg.axis != 2) throw ValidationError(where + ": axis must be 1 or 2");
    if (seg.axis == 2 && topology.is_ring()) {
      throw ValidationError(where + ": axis 2 requires the torus topology");
    }
    if (!std::isfinite(seg.v)) throw ValidationError(where + ": v must be finite");
    if (!(seg.t_start_ms < seg.t_end_ms)) {
      throw ValidationError(where + ": t_start_ms must be < t_end_ms");
    }
    if (seg.t_start_ms < 0.0 || seg.t_end_ms > duration_ms) {
      throw ValidationError(where + ": times must lie within [0, duration_ms]");
    }
    for (std::size_t o = 0; o < s; ++o) {
      const auto& other = segments[o];
      if (other.axis == seg.axis && other.t_start_ms < seg.t_end_ms &&
          seg.t_start_ms < other.t_end_ms) {
        throw ValidationError(where + " overlaps segment " + std::to_string(o) + " on axis " +
                              std::to_string(seg.axis));
      }
    }
  }
}

auto VelocityProfile::velocity(double t_ms, int axis) const -> double {
  for (const auto& seg : segments) {
    if (seg.axis == axis && seg.t_start_ms <= t_ms && t_ms < seg.t_end_ms) return seg.v;
  }
  return 0.0;
}

auto VelocityProfile::displacement(double t_ms, int axis) const -> double {
  double x = 0.0;
  for (const auto& seg : segments) {
    if (seg.axis != axis || t_ms <= seg.t_start_ms) continue;
    x += seg.v * (std::min(t_ms, seg.t_end_ms) - seg.t_start_ms) / kEpochMs;
  }
  return x;
}

auto VelocityProfile::epochs_started(double t_ms, int axis) const -> long long {
  long long count = 0;
  for (const auto& seg : segments) {
    if (seg.axis != axis || seg.v == 0.0 || t_ms < seg.t_start_ms) continue;
    const double speed = std::abs(seg.v);
    long long n = 0;
    if (t_ms < seg.t_end_ms) {
      n = static_cast<long long>(std::floor(speed * (t_ms - seg.t_start_ms) / kEpochMs + kEpochSlack)) + 1;
    } else {
      n = static_cast<long long>(
          std::ceil(speed * (seg.t_end_ms - seg.t_start_ms) / kEpochMs - kEpochSlack));
    }
    count += sign(seg.v) * n;
  }
  return count;
}

auto VelocityProfile::first_motion_ms(double fallback) const -> double {
  double first = fallback;
  for (const auto& seg : segments) {
    if (seg.v != 0.0) first = std::min(first, seg.t_start_ms);
  }
  return first;
}

auto PhaseState::wrapped(int axis) const -> double {
  const double th = axis == 1 ? theta1 : theta2;
  const double w = std::fmod(th, kTwoPi);
  return w < 0.0 ? w + kTwoPi : w;
}

auto PhaseState::nearest_node(int axis) const -> NodeIndex {
  return NodeIndex{static_cast<long long>(std::llround(wrapped(axis) / kNodeAngle))};
}

auto PhaseState::at(TorusCoord c) -> PhaseState {
  return PhaseState{kNodeAngle * c.i.value(), kNodeAngle * c.j.value()};
}

auto bump_position(std::span<const double> rates) -> std::size_t {
  const auto k = peak_index(rates);
  if (!k) throw NoBumpError("no bump: every rate is <= 0");
  return *k;
}

auto bump_position(Topology topology, std::span<const double> rates) -> TorusCoord {
  if (rates.size() != topology.size()) throw ValidationError("rate field does not match topology");
  return topology.coord(bump_position(rates));
}

auto shift_input_1d(std::span<const double> rates, double v, ShiftGain g) -> Field {
  const std::size_t k = bump_position(rates);
  const std::size_t n = rates.size();
  Field in(n, 0.0);
  if (v == 0.0) return in;
  in[(k + 1) % n] += g.i_shift * v;
  in[(k + n - 1) % n] -= g.i_shift * v;
  return in;
}

auto integrate_phase(PhaseState ph, double v1_nodes_per_s, double v2_nodes_per_s, double dt_ms)
    -> PhaseState {
  if (!(dt_ms > 0.0)) throw ValidationError("integrate_phase: dt_ms must be > 0");
  ph.theta1 += kNodeAngle * v1_nodes_per_s * (dt_ms / 1000.0);
  ph.theta2 += kNodeAngle * v2_nodes_per_s * (dt_ms / 1000.0);
  return ph;
}

auto torus_input(PhaseState ph, double i0) -> Field {
  const Topology torus = Topology::torus();
  Field in(torus.size());
  for (int i = 0; i < kRingSize; ++i) {
    const double row = i0 * std::cos(ph.theta1 - kNodeAngle * i);
    for (int j = 0; j < kRingSize; ++j) {
      in[static_cast<std::size_t>(i * kRingSize + j)] = row + i0 * std::cos(ph.theta2 - kNodeAngle * j);
    }
  }
  return in;
}

auto phase_at(const VelocityProfile& profile, PhaseState initial, double t_ms) -> PhaseState {
  PhaseState ph = initial;
  for (const auto& seg : profile.segments) {
    if (t_ms <= seg.t_start_ms) continue;
    const double elapsed = std::min(t_ms, seg.t_end_ms) - seg.t_start_ms;
    const double v = seg.v * kNodesPerSecondPerUnit;
    ph = seg.axis == 1 ? integrate_phase(ph, v, 0.0, elapsed) : integrate_phase(ph, 0.0, v, elapsed);
  }
  return ph;
}

auto schedule_input(Topology topology, const VelocityProfile& profile, NavigationMode mode,
                    const NavigationGains& gains, const BumpInit& init) -> InputSchedule {
  if (mode == NavigationMode::Shift1D && !topology.is_ring()) {
    throw ValidationError("navigation mode shift-1d requires the ring topology");
  }
  if (mode == NavigationMode::Phase2D && !topology.is_torus()) {
    throw ValidationError("navigation mode phase-2d requires the torus topology");
  }
  for (const auto& seg : profile.segments) {
    if (seg.axis == 2 && topology.is_ring()) {
      throw ValidationError("velocity profile uses axis 2 on the ring topology");
    }
  }
  if (!(gains.i_shift >= 0.0)) throw ValidationError("i_shift must be >= 0");
  if (!(gains.i0 >= 0.0)) throw ValidationError("i0 must be >= 0");

  Field hold = init_bump(topology, init.center, init.width_nodes, init.amplitude);
  const double hold_ms = init.hold_ms;

  if (mode == NavigationMode::Phase2D) {
    const PhaseState start = PhaseState::at(topology.coord(init.center));
    return [=](double t, std::span<const double>) -> Field {
      Field in = torus_input(phase_at(profile, start, t), gains.i0);
      if (t < hold_ms) {
        for (std::size_t k = 0; k < in.size(); ++k) in[k] += hold[k];
      }
      return in;
    };
  }

  const ShiftGain g{gains.i_shift};
  const NodeIndex center{static_cast<long long>(init.center)};
  const bool clocked = gains.shift_mode == ShiftMode::StepClock;
  return [=](double t, std::span<const double> rates) -> Field {
    Field in = t < hold_ms ? hold : Field(rates.size(), 0.0);
    const double v = profile.velocity(t);
    if (v == 0.0) return in;
    if (clocked) {
      const NodeIndex target = rotate(center, profile.epochs_started(t));
      if (NodeIndex{static_cast<long long>(bump_position(rates))} == target) return in;
    }
    const Field shift = shift_input_1d(rates, v, g);
    for (std::size_t k = 0; k < in.size(); ++k) in[k] += shift[k];
    return in;
  };
}

}  // namespace harmonic
