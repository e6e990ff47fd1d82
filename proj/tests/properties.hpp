#pragma once

// Simulation-free and simulation-backed property checks, shared by the unit tests
// and the acceptance binary. Each returns ok plus a short diagnostic.

#include <string>

namespace harmonic::props {

struct Result {
  bool ok = true;
  std::string detail;
};

auto distance_matches_brute_force() -> Result;  // 144 pairs
auto distance_triangle_inequality() -> Result;  // 1728 triples
auto toroidal_distance_composition() -> Result;  // 20736 pairs
auto kernel_circulant_and_symmetric() -> Result;  // ring and torus, exact
auto trace_translation_equivariance(int shift) -> Result;  // ring shift s, torus (s, 2s)
auto dt_halving() -> Result;
auto shift_input_antisymmetry(int cases) -> Result;
auto leak_law(int steps) -> Result;

}  // namespace harmonic::props
