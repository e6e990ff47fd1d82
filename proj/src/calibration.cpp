#include "harmonic/experiment.hpp"

#include <cmath>

#include "harmonic/errors.hpp"
#include "parallel.hpp"

namespace harmonic {

auto CalibrationGrid::standard() -> CalibrationGrid {
  CalibrationGrid g;
  for (int k = 0; k <= 8; ++k) g.j_exc.push_back(2.0 + 0.25 * k);
  // Built from integers so the values print as 0.8, 0.9, ... exactly.
  for (int k = 0; k <= 12; ++k) g.sigma_exc.push_back((8 + k) / 10.0);
  return g;
}

auto CalibrationResult::best() const -> const CalibrationCandidate* {
  return selected ? &candidates.at(*selected) : nullptr;
}

auto parameter_deviation(const KernelParams& p, const KernelParams& reference) -> double {
  return std::abs(p.j_exc - reference.j_exc) / reference.j_exc +
         std::abs(p.sigma_exc - reference.sigma_exc) / reference.sigma_exc;
}

auto evaluate_candidate(const KernelParams& p, double rate_cap) -> CalibrationCandidate {
  CalibrationCandidate c;
  c.params = p;
  c.deviation = parameter_deviation(p, KernelParams::published());
  try {
    const ExperimentReport still = run_spec(builtin::stability(p, rate_cap)).report;
    c.persistent = still.verdict(check::kPersistence) && still.verdict(check::kDrift);

    ExperimentSpec rot = builtin::rotation_180();
    rot.kernel = p;
    rot.dynamics.rate_cap = rate_cap;
    const ExperimentReport moved = run_spec(rot).report;
    c.steerable = moved.verdict(check::kAccuracy) && moved.verdict(check::kFinalPosition) &&
                  moved.verdict(check::kSequence) && moved.verdict(check::kDrift) &&
                  moved.verdict(check::kAmplitudeCv);
  } catch (const DivergenceError&) {
    c.diverged = true;
    c.persistent = false;
    c.steerable = false;
  }
  return c;
}

auto calibrate_ring_kernel(const CalibrationGrid& grid, double rate_cap, unsigned threads)
    -> CalibrationResult {
  const KernelParams base = KernelParams::published();
  std::vector<KernelParams> points;
  for (const double j : grid.j_exc) {
    for (const double s : grid.sigma_exc) {
      KernelParams p = base;
      p.j_exc = j;
      p.sigma_exc = s;
      if (p.sigma_exc < p.sigma_inh) points.push_back(p);
    }
  }
  CalibrationResult result;
  result.candidates.resize(points.size());
  detail::parallel_for(points.size(), threads,
                       [&](std::size_t k) { result.candidates[k] = evaluate_candidate(points[k], rate_cap); });
  for (std::size_t k = 0; k < result.candidates.size(); ++k) {
    const auto& c = result.candidates[k];
    if (!c.accepted()) continue;
    if (!result.selected || c.deviation < result.candidates[*result.selected].deviation - 1e-12) {
      result.selected = k;
    }
  }
  return result;
}

}  // namespace harmonic
