#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "harmonic/errors.hpp"
#include "harmonic/navigation.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace harmonic;

namespace {

auto one_hot(std::size_t n, std::size_t k) -> Field {
  Field f(n, 0.0);
  f[k] = 1.0;
  return f;
}

auto rotation_profile() -> VelocityProfile {
  VelocityProfile p;
  p.segments = {VelocitySegment{200.0, 800.0, 1.0, 1}};
  return p;
}

}  // namespace

TEST_CASE("bump position") {
  CHECK(bump_position(one_hot(12, 4)) == 4);
  CHECK_THROWS_AS((void)bump_position(Field(12, 0.0)), NoBumpError);
  Field g(12);
  for (int k = 0; k < 12; ++k) g[k] = std::exp(-std::pow(oracle::ring_distance(k, 9), 2));
  CHECK(bump_position(g) == 9);
  Field tie(12, 0.0);
  tie[3] = tie[8] = 1.0;
  CHECK(bump_position(tie) == 3);
  const Topology t = Topology::torus();
  CHECK(bump_position(t, one_hot(144, t.flat({NodeIndex{3}, NodeIndex{9}}))) == TorusCoord{NodeIndex{3}, NodeIndex{9}});
}

TEST_CASE("shift input") {
  const ShiftGain g{0.8};
  const Field at3 = shift_input_1d(one_hot(12, 3), 1.0, g);
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(at3[k] == (k == 4 ? 0.8 : k == 2 ? -0.8 : 0.0));
  }
  for (double x : shift_input_1d(one_hot(12, 7), 0.0, g)) CHECK(x == 0.0);
  const Field at11 = shift_input_1d(one_hot(12, 11), 1.0, g);
  CHECK(at11[0] == 0.8);
  CHECK(at11[10] == -0.8);
  CHECK_THROWS_AS((void)shift_input_1d(Field(12, 0.0), 1.0, g), NoBumpError);
}

TEST_CASE("shift input sums to zero and flips with v") {
  const auto r = props::shift_input_antisymmetry(2000);
  CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("phase integration") {
  PhaseState ph{};
  CHECK(integrate_phase(ph, 0.0, 0.0, 37.0).theta1 == 0.0);
  for (int n = 0; n < 6000; ++n) ph = integrate_phase(ph, 10.0, 0.0, 0.1);
  CHECK(ph.theta1 == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(ph.theta2 == 0.0);
  CHECK(ph.nearest_node(1).value() == static_cast<int>(oracle::nodes_travelled(1.0, 600.0)));
}

TEST_CASE("phase accumulation is linear in time regardless of partition") {
  const double v = 7.3;
  const double total = 450.0;
  const double exact = 2.0 * std::numbers::pi / 12.0 * v * total / 1000.0;
  for (double dt : {0.01, 0.1, 0.25, 1.5, 450.0}) {
    PhaseState ph{};
    const int n = static_cast<int>(std::lround(total / dt));
    for (int k = 0; k < n; ++k) ph = integrate_phase(ph, v, -v, dt);
    // 1e-12, widened to the rounding bound of n additions for very fine partitions.
    const double tol = std::max(1e-12, n * std::numeric_limits<double>::epsilon() * exact);
    CHECK(std::abs(ph.theta1 - exact) < tol);
    CHECK(std::abs(ph.theta2 + exact) < tol);
  }
}

TEST_CASE("torus pinning input") {
  const Topology t = Topology::torus();
  const Field zero = torus_input(PhaseState{}, 0.8);
  CHECK(bump_position(zero) == 0);
  CHECK(zero[0] == doctest::Approx(1.6).epsilon(1e-15));
  const Field half = torus_input(PhaseState{std::numbers::pi, 0.0}, 0.8);
  CHECK(bump_position(t, half) == TorusCoord{NodeIndex{6}, NodeIndex{0}});

  for (double a = 0.0; a < 6.3; a += 0.37) {
    for (double b = 0.0; b < 6.3; b += 0.41) {
      const Field f = torus_input(PhaseState{a, b}, 0.8);
      for (std::size_t k = 0; k < 144; ++k) {
        // antipodal cancellation
        CHECK(std::abs(f[k] + f[t.shift(k, 6, 6)]) < 1e-12);
      }
      for (int j = 0; j < 12; ++j) {
        const double ref = f[t.flat({NodeIndex{0}, NodeIndex{j}})] - f[0];
        for (int i = 1; i < 12; ++i) {
          const double d = f[t.flat({NodeIndex{i}, NodeIndex{j}})] - f[t.flat({NodeIndex{i}, NodeIndex{0}})];
          CHECK(std::abs(d - ref) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("velocity profile") {
  const VelocityProfile p = rotation_profile();
  CHECK(p.velocity(199.9) == 0.0);
  CHECK(p.velocity(200.0) == 1.0);
  CHECK(p.velocity(800.0) == 0.0);
  CHECK(p.displacement(800.0) == doctest::Approx(6.0));
  CHECK(p.epochs_started(100.0) == 0);
  CHECK(p.epochs_started(200.0) == 1);
  CHECK(p.epochs_started(299.9) == 1);
  CHECK(p.epochs_started(300.0) == 2);
  CHECK(p.epochs_started(799.9) == 6);
  CHECK(p.epochs_started(950.0) == 6);
  CHECK_THROWS_AS(p.validate(Topology::ring(), 700.0), ValidationError);
  VelocityProfile axis2;
  axis2.segments = {VelocitySegment{0.0, 100.0, 1.0, 2}};
  CHECK_THROWS_AS(axis2.validate(Topology::ring(), 1000.0), ValidationError);
  CHECK_NOTHROW(axis2.validate(Topology::torus(), 1000.0));
  VelocityProfile overlap;
  overlap.segments = {VelocitySegment{0.0, 100.0, 1.0, 1}, VelocitySegment{50.0, 150.0, 1.0, 1}};
  CHECK_THROWS_AS(overlap.validate(Topology::ring(), 1000.0), ValidationError);
}

TEST_CASE("1D input schedule") {
  const Topology ring = Topology::ring();
  const BumpInit init;
  SUBCASE("no profile means no input after the hold") {
    const InputSchedule in = schedule_input(ring, {}, NavigationMode::Shift1D, {}, init);
    CHECK(in(50.0, one_hot(12, 0))[0] == 1.0);
    for (double t : {100.0, 400.0, 999.0}) {
      for (double x : in(t, one_hot(12, 5))) CHECK(x == 0.0);
    }
  }
  SUBCASE("shift input only while the velocity segment is active") {
    const InputSchedule in = schedule_input(ring, rotation_profile(), NavigationMode::Shift1D, {}, init);
    for (double t : {150.0, 199.9, 800.0, 900.0}) {
      for (std::size_t k = 0; k < 12; ++k) {
        for (double x : in(t, one_hot(12, k))) CHECK(x == 0.0);
      }
    }
    // Bump behind the clock target: push forward.
    const Field push = in(250.0, one_hot(12, 0));
    CHECK(push[1] == 0.8);
    CHECK(push[11] == -0.8);
    // Bump on target: idle until the next epoch.
    for (double x : in(250.0, one_hot(12, 1))) CHECK(x == 0.0);
  }
  SUBCASE("mode must fit the topology") {
    CHECK_THROWS_AS((void)schedule_input(ring, {}, NavigationMode::Phase2D, {}, init), ValidationError);
    CHECK_THROWS_AS((void)schedule_input(Topology::torus(), {}, NavigationMode::Shift1D, {}, init), ValidationError);
  }
}

TEST_CASE("2D input schedule moves rows then columns") {
  const Topology t = Topology::torus();
  VelocityProfile p;
  p.segments = {VelocitySegment{200.0, 800.0, 1.0, 1}, VelocitySegment{1000.0, 1300.0, 1.0, 2}};
  const InputSchedule in = schedule_input(t, p, NavigationMode::Phase2D, {}, BumpInit{});
  const Field silent(144, 0.0);
  const auto peak = [&](double ms) { return bump_position(t, in(ms, silent)); };
  CHECK(peak(150.0) == TorusCoord{NodeIndex{0}, NodeIndex{0}});
  CHECK(peak(500.0) == TorusCoord{NodeIndex{3}, NodeIndex{0}});
  CHECK(peak(900.0) == TorusCoord{NodeIndex{6}, NodeIndex{0}});
  CHECK(peak(1170.0) == TorusCoord{NodeIndex{6}, NodeIndex{2}});
  CHECK(peak(1400.0) == TorusCoord{NodeIndex{6}, NodeIndex{3}});
  const PhaseState end = phase_at(p, PhaseState{}, 1500.0);
  CHECK(end.nearest_node(1).value() == static_cast<int>(oracle::nodes_travelled(1.0, 600.0)));
  CHECK(end.nearest_node(2).value() == static_cast<int>(oracle::nodes_travelled(1.0, 300.0)));
}
