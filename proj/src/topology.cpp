#include "harmonic/topology.hpp"

#include <array>
#include <cmath>

namespace harmonic {

auto to_string(PitchLabel label) -> std::string_view {
  static constexpr std::array<std::string_view, kRingSize> names = {
      "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
  return names[static_cast<std::size_t>(label)];
}

auto toroidal_distance(TorusCoord a, TorusCoord b) -> double {
  const int di = harmonic_distance(a.i, b.i);
  const int dj = harmonic_distance(a.j, b.j);
  return std::sqrt(static_cast<double>(di * di + dj * dj));
}

auto Topology::name() const -> std::string_view { return is_ring() ? "ring" : "torus"; }

auto Topology::coord(std::size_t flat) const -> TorusCoord {
  if (is_ring()) return TorusCoord{NodeIndex{static_cast<long long>(flat)}, NodeIndex{}};
  return TorusCoord{NodeIndex{static_cast<long long>(flat / kRingSize)},
                    NodeIndex{static_cast<long long>(flat % kRingSize)}};
}

auto Topology::flat(TorusCoord c) const -> std::size_t {
  if (is_ring()) return static_cast<std::size_t>(c.i.value());
  return static_cast<std::size_t>(c.i.value() * kRingSize + c.j.value());
}

auto Topology::translate(std::size_t node, std::size_t offset) const -> std::size_t {
  const TorusCoord o = coord(offset);
  return shift(node, o.i.value(), o.j.value());
}

auto Topology::shift(std::size_t node, long long di, long long dj) const -> std::size_t {
  const TorusCoord c = coord(node);
  if (is_ring()) return static_cast<std::size_t>(rotate(c.i, di).value());
  return flat(rotate(c, di, dj));
}

auto Topology::distance(std::size_t a, std::size_t b) const -> double {
  const TorusCoord ca = coord(a);
  const TorusCoord cb = coord(b);
  if (is_ring()) return static_cast<double>(harmonic_distance(ca.i, cb.i));
  return toroidal_distance(ca, cb);
}

}  // namespace harmonic
