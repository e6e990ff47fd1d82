#pragma once

// Mexican-hat recurrent kernels and forward-Euler integration of the
// threshold-linear rate dynamics
//
//   tau dr/dt = -r + Phi(W r + I_ext),   Phi(x) = min(cap, max(0, x)).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "harmonic/topology.hpp"
#include "harmonic/trace.hpp"

namespace harmonic {

/// Difference-of-Gaussians gains and widths. Widths are in nodes.
struct KernelParams {
  double j_exc = 2.5;
  double j_inh = 1.8;
  double sigma_exc = 0.8;
  double sigma_inh = 2.5;

  /// Published parameter set.
  [[nodiscard]] static constexpr auto published() -> KernelParams { return {2.5, 1.8, 0.8, 2.5}; }

  /// Smallest deviation from `published()` on the calibration grid that holds a
  /// self-sustained, steerable bump under a unit rate cap. Reproduced by
  /// `calibrate_ring_kernel()`.
  [[nodiscard]] static constexpr auto calibrated() -> KernelParams { return {2.5, 1.8, 1.8, 2.5}; }

  /// Throws ValidationError unless gains are >= 0, widths > 0 and sigma_inh > sigma_exc.
  void validate() const;

  friend auto operator==(const KernelParams&, const KernelParams&) -> bool = default;
};

/// J_exc exp(-(d/sigma_exc)^2) - J_inh exp(-(d/sigma_inh)^2).
[[nodiscard]] auto mexican_hat(const KernelParams& p, double distance) -> double;

struct DynamicsParams {
  double tau_ms = 10.0;
  double dt_ms = 0.1;
  std::optional<double> rate_cap;
  double noise_std = 0.0;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;

  friend auto operator==(const DynamicsParams&, const DynamicsParams&) -> bool = default;
};

/// Rates above this bound (or non-finite rates) abort a run.
inline constexpr double kDivergenceBound = 1e6;

/// Rectification, clipped at `cap` when one is given.
[[nodiscard]] constexpr auto transfer(double x, std::optional<double> cap = std::nullopt) -> double {
  const double y = x > 0.0 ? x : 0.0;
  return (cap && y > *cap) ? *cap : y;
}

/// Dense node-by-node weight matrix over a topology.
///
/// Kernels built here depend only on the distance between endpoints, so the matrix
/// is circulant under the topology's translation group. `drive()` exploits that by
/// summing each row in translation-offset order, which makes the recurrent drive
/// of a translated rate field the exactly translated drive.
class WeightMatrix {
 public:
  /// All-zero weights.
  explicit WeightMatrix(Topology topology);

  [[nodiscard]] auto topology() const -> Topology { return topology_; }
  [[nodiscard]] auto size() const -> std::size_t { return topology_.size(); }
  [[nodiscard]] auto operator()(std::size_t row, std::size_t col) const -> double {
    return w_[row * size() + col];
  }
  [[nodiscard]] auto row(std::size_t r) const -> std::span<const double> {
    return {w_.data() + r * size(), size()};
  }

  /// out[k] = sum over offsets o of W(k, k+o) * rates[k+o].
  void drive(std::span<const double> rates, std::span<double> out) const;

  friend auto build_kernel(Topology topology, const KernelParams& p, double scale) -> WeightMatrix;

 private:
  Topology topology_;
  std::vector<double> w_;
  std::vector<std::size_t> neighbour_;  // neighbour_[k * n + o] = translate(k, o)
};

[[nodiscard]] auto build_kernel(Topology topology, const KernelParams& p, double scale = 1.0)
    -> WeightMatrix;
[[nodiscard]] auto build_ring_kernel(const KernelParams& p, double scale = 1.0) -> WeightMatrix;
[[nodiscard]] auto build_torus_kernel(const KernelParams& p, double scale = 1.0) -> WeightMatrix;

/// Rates over a topology plus the (shared, immutable) recurrent weights.
struct NetworkState {
  Topology topology;
  Field rates;
  std::shared_ptr<const WeightMatrix> weights;

  /// All-zero rates on the weights' topology.
  [[nodiscard]] static auto quiescent(std::shared_ptr<const WeightMatrix> weights) -> NetworkState;
};

/// One forward-Euler step r <- r + (dt/tau)(-r + Phi(W r + I)).
/// Throws ValidationError on an input field of the wrong size.
[[nodiscard]] auto step(const NetworkState& state, std::span<const double> external_input,
                        const DynamicsParams& d) -> NetworkState;

/// External input as a function of time and the current rates.
using InputSchedule = std::function<Field(double t_ms, std::span<const double> rates)>;

/// Integrates `state` for `duration_ms`, sampling at t = 0, every `sample_every_ms`,
/// and at the final step. Both durations must be whole multiples of dt.
///
/// With noise_std > 0, white Gaussian noise drawn from a generator seeded by `seed`
/// is added to every node's input at every step.
///
/// Throws DivergenceError when a rate turns non-finite or exceeds kDivergenceBound.
[[nodiscard]] auto run(NetworkState state, const InputSchedule& input, const DynamicsParams& d,
                       double duration_ms, double sample_every_ms, std::uint64_t seed = 0)
    -> Trace;

/// amplitude * exp(-(d/width)^2), d the topology's distance from `center`.
[[nodiscard]] auto init_bump(Topology topology, std::size_t center, double width_nodes,
                             double amplitude) -> Field;

}  // namespace harmonic
