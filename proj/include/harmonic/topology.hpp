#pragma once

// Arithmetic of the 12-node fifths ring and the 12x12 fifths/fourths torus.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace harmonic {

inline constexpr int kRingSize = 12;

/// Mathematical mod 12: the result lies in [0, 11] for negative operands too.
constexpr auto mod12(long long x) -> int {
  const auto r = static_cast<int>(x % kRingSize);
  return r < 0 ? r + kRingSize : r;
}

/// Position on the fifths ring, always reduced mod 12.
class NodeIndex {
 public:
  constexpr NodeIndex() = default;
  constexpr explicit NodeIndex(long long k) : k_(mod12(k)) {}

  [[nodiscard]] constexpr auto value() const -> int { return k_; }

  friend constexpr auto operator<=>(NodeIndex, NodeIndex) = default;

 private:
  int k_ = 0;
};

/// Point on the torus: i runs along the fifths axis, j along the fourths axis.
struct TorusCoord {
  NodeIndex i;
  NodeIndex j;

  friend constexpr auto operator<=>(const TorusCoord&, const TorusCoord&) = default;
};

/// Pitch class with sharp-only spelling, numbered C=0 ... B=11.
enum class PitchLabel : std::uint8_t { C, Cs, D, Ds, E, F, Fs, G, Gs, A, As, B };

[[nodiscard]] auto to_string(PitchLabel label) -> std::string_view;
[[nodiscard]] constexpr auto semitone(PitchLabel label) -> int { return static_cast<int>(label); }
[[nodiscard]] constexpr auto pitch_from_semitone(long long s) -> PitchLabel {
  return static_cast<PitchLabel>(mod12(s));
}

/// Minimal number of fifth-steps between two nodes, in [0, 6].
[[nodiscard]] constexpr auto harmonic_distance(NodeIndex a, NodeIndex b) -> int {
  const int d = a.value() > b.value() ? a.value() - b.value() : b.value() - a.value();
  return d < kRingSize - d ? d : kRingSize - d;
}

/// Euclidean composition of the per-axis harmonic distances.
[[nodiscard]] auto toroidal_distance(TorusCoord a, TorusCoord b) -> double;

[[nodiscard]] constexpr auto rotate(NodeIndex k, long long steps) -> NodeIndex {
  return NodeIndex{static_cast<long long>(k.value()) + mod12(steps)};
}

[[nodiscard]] constexpr auto rotate(TorusCoord c, long long di, long long dj) -> TorusCoord {
  return TorusCoord{rotate(c.i, di), rotate(c.j, dj)};
}

/// Node k of the fifths ring names pitch class 7k mod 12.
[[nodiscard]] constexpr auto fifths_label(NodeIndex k) -> PitchLabel {
  return pitch_from_semitone(7LL * k.value());
}

/// Node j of the fourths axis names pitch class 5j mod 12 (a fourth is -7 mod 12).
[[nodiscard]] constexpr auto fourths_label(NodeIndex j) -> PitchLabel {
  return pitch_from_semitone(5LL * j.value());
}

enum class TopologyKind : std::uint8_t { Ring, Torus };

/// Layout of the rate units. Nodes are addressed by a flat index; torus nodes are
/// stored row-major, flat = 12 * i + j.
///
/// Both layouts are Cayley graphs of an abelian group, so every node can be
/// reached from every other by a group translation. `translate(node, offset)`
/// applies the translation that maps node 0 onto `offset`.
class Topology {
 public:
  [[nodiscard]] static constexpr auto ring() -> Topology { return Topology{TopologyKind::Ring}; }
  [[nodiscard]] static constexpr auto torus() -> Topology { return Topology{TopologyKind::Torus}; }

  [[nodiscard]] constexpr auto kind() const -> TopologyKind { return kind_; }
  [[nodiscard]] constexpr auto is_ring() const -> bool { return kind_ == TopologyKind::Ring; }
  [[nodiscard]] constexpr auto is_torus() const -> bool { return kind_ == TopologyKind::Torus; }
  [[nodiscard]] constexpr auto size() const -> std::size_t {
    return is_ring() ? kRingSize : static_cast<std::size_t>(kRingSize) * kRingSize;
  }
  [[nodiscard]] auto name() const -> std::string_view;

  [[nodiscard]] auto coord(std::size_t flat) const -> TorusCoord;
  [[nodiscard]] auto flat(TorusCoord c) const -> std::size_t;

  [[nodiscard]] auto translate(std::size_t node, std::size_t offset) const -> std::size_t;

  /// Cyclic shift by di along the fifths axis and dj along the fourths axis.
  /// On the ring dj is ignored.
  [[nodiscard]] auto shift(std::size_t node, long long di, long long dj = 0) const -> std::size_t;

  /// Harmonic distance on the ring, toroidal distance on the torus.
  [[nodiscard]] auto distance(std::size_t a, std::size_t b) const -> double;

  friend constexpr auto operator==(Topology, Topology) -> bool = default;

 private:
  constexpr explicit Topology(TopologyKind kind) : kind_(kind) {}
  TopologyKind kind_;
};

}  // namespace harmonic
