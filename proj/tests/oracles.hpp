#pragma once

// Reference values computed independently of the library: brute-force walks and
// closed forms, plus kernel values evaluated offline at 25-digit precision (mpmath).

#include <cmath>
#include <vector>

namespace harmonic::oracle {

// Shortest walk between two ring nodes, counted one step at a time in both directions.
inline auto ring_distance(int a, int b) -> int {
  int cw = 0;
  for (int k = a; k != b; k = (k + 1) % 12) ++cw;
  int ccw = 0;
  for (int k = a; k != b; k = (k + 11) % 12) ++ccw;
  return cw < ccw ? cw : ccw;
}

// Node reached by |steps| single increments or decrements.
inline auto walk(int k, int steps) -> int {
  for (int s = 0; s < std::abs(steps); ++s) k = steps > 0 ? (k + 1) % 12 : (k + 11) % 12;
  return k;
}

// Published kernel (2.5, 1.8, 0.8, 2.5) at distance 1, 6 and sqrt(2).
inline constexpr double kPublishedAt1 = -1.00983035226143585291;
inline constexpr double kPublishedAt6 = -0.00567200087719999300407;
inline constexpr double kPublishedAtSqrt2 = -1.19722593267412512142;

// Nodes traversed at 10 nodes/s per unit velocity over a segment of `ms`.
inline auto nodes_travelled(double v, double ms) -> double { return v * 10.0 * ms / 1000.0; }

// Node sequence visited when stepping one node at a time from `from`.
inline auto stepped_sequence(int from, int steps) -> std::vector<int> {
  std::vector<int> seq{from};
  for (int s = 0; s < std::abs(steps); ++s) seq.push_back(walk(seq.back(), steps > 0 ? 1 : -1));
  return seq;
}

}  // namespace harmonic::oracle
