#include "harmonic/trace.hpp"

#include <algorithm>
#include <stdexcept>

#include "harmonic/errors.hpp"

namespace harmonic {

auto peak_index(std::span<const double> rates) -> std::optional<std::size_t> {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] > 0.0 && (!best || rates[k] > rates[*best])) best = k;
  }
  return best;
}

void Trace::record(double t_ms, Field rates) {
  if (rates.size() != topology_.size()) {
    throw ValidationError("trace sample has " + std::to_string(rates.size()) + " rates, topology has " +
                          std::to_string(topology_.size()) + " nodes");
  }
  if (!samples_.empty() && !(t_ms > samples_.back().t_ms)) {
    throw ValidationError("trace sample times must be strictly increasing");
  }
  TraceSample s;
  s.t_ms = t_ms;
  s.decoded = peak_index(rates);
  s.amplitude = rates.empty() ? 0.0 : *std::max_element(rates.begin(), rates.end());
  s.rates = std::move(rates);
  samples_.push_back(std::move(s));
}

auto Trace::window(double start_ms, double end_ms) const -> std::span<const TraceSample> {
  const auto first = std::lower_bound(samples_.begin(), samples_.end(), start_ms,
                                      [](const TraceSample& s, double t) { return s.t_ms < t; });
  const auto last = std::upper_bound(samples_.begin(), samples_.end(), end_ms,
                                     [](double t, const TraceSample& s) { return t < s.t_ms; });
  if (first >= last) return {};
  return {&*first, static_cast<std::size_t>(last - first)};
}

}  // namespace harmonic
