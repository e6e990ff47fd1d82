#include "harmonic/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "harmonic/errors.hpp"

namespace harmonic {

namespace {

// n * dt snapped to a 1e-9 ms grid so that sample and schedule times are the
// nearest doubles to their decimal values.
auto step_time(long long n, double dt_ms) -> double {
  return std::round(static_cast<double>(n) * dt_ms * 1e9) / 1e9;
}

auto whole_steps(double span_ms, double dt_ms, const char* what) -> long long {
  const double q = span_ms / dt_ms;
  const double n = std::round(q);
  if (std::abs(q - n) > 1e-6 * std::max(1.0, q)) {
    std::ostringstream os;
    os << what << " (" << span_ms << " ms) is not a whole multiple of dt_ms (" << dt_ms << ")";
    throw ValidationError(os.str());
  }
  return static_cast<long long>(n);
}

// In-place Euler update; `scratch` receives the recurrent drive.
void advance(Field& rates, std::span<const double> input, const WeightMatrix& w,
             const DynamicsParams& d, Field& scratch) {
  scratch.resize(rates.size());
  w.drive(rates, scratch);
  const double a = d.dt_ms / d.tau_ms;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    rates[k] += a * (-rates[k] + transfer(scratch[k] + input[k], d.rate_cap));
  }
}

void check_input_size(std::span<const double> input, Topology topology) {
  if (input.size() != topology.size()) {
    throw ValidationError("external input has " + std::to_string(input.size()) +
                          " entries, topology " + std::string(topology.name()) + " has " +
                          std::to_string(topology.size()) + " nodes");
  }
}

}  // namespace

void KernelParams::validate() const {
  if (!(sigma_exc > 0.0) || !(sigma_inh > 0.0)) {
    throw ValidationError("KernelParams: sigma_exc and sigma_inh must be > 0");
  }
  if (!(j_exc >= 0.0) || !(j_inh >= 0.0)) {
    throw ValidationError("KernelParams: j_exc and j_inh must be >= 0");
  }
  if (!(sigma_inh > sigma_exc)) {
    throw ValidationError("KernelParams: sigma_inh must exceed sigma_exc (broader inhibition)");
  }
}

auto mexican_hat(const KernelParams& p, double distance) -> double {
  const double e = distance / p.sigma_exc;
  const double i = distance / p.sigma_inh;
  return p.j_exc * std::exp(-(e * e)) - p.j_inh * std::exp(-(i * i));
}

void DynamicsParams::validate() const {
  if (!(tau_ms > 0.0)) throw ValidationError("DynamicsParams: tau_ms must be > 0");
  if (!(dt_ms > 0.0) || dt_ms > tau_ms / 10.0) {
    throw ValidationError("DynamicsParams: dt_ms must satisfy 0 < dt_ms <= tau_ms/10");
  }
  if (rate_cap && !(*rate_cap > 0.0)) {
    throw ValidationError("DynamicsParams: rate_cap must be > 0 when present");
  }
  if (!(noise_std >= 0.0)) throw ValidationError("DynamicsParams: noise_std must be >= 0");
}

WeightMatrix::WeightMatrix(Topology topology)
    : topology_(topology), w_(topology.size() * topology.size(), 0.0) {
  const std::size_t n = topology.size();
  neighbour_.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t o = 0; o < n; ++o) neighbour_[k * n + o] = topology.translate(k, o);
  }
}

void WeightMatrix::drive(std::span<const double> rates, std::span<double> out) const {
  const std::size_t n = size();
  for (std::size_t k = 0; k < n; ++k) {
    const double* wrow = w_.data() + k * n;
    const std::size_t* nb = neighbour_.data() + k * n;
    double sum = 0.0;
    for (std::size_t o = 0; o < n; ++o) sum += wrow[nb[o]] * rates[nb[o]];
    out[k] = sum;
  }
}

auto build_kernel(Topology topology, const KernelParams& p, double scale) -> WeightMatrix {
  if (!(p.sigma_exc > 0.0) || !(p.sigma_inh > 0.0)) {
    throw ValidationError("KernelParams: sigma_exc and sigma_inh must be > 0");
  }
  if (!(scale >= 0.0)) throw ValidationError("kernel scale must be >= 0");
  WeightMatrix w(topology);
  const std::size_t n = topology.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      w.w_[k * n + j] = scale * mexican_hat(p, topology.distance(k, j));
    }
  }
  return w;
}

auto build_ring_kernel(const KernelParams& p, double scale) -> WeightMatrix {
  return build_kernel(Topology::ring(), p, scale);
}

auto build_torus_kernel(const KernelParams& p, double scale) -> WeightMatrix {
  return build_kernel(Topology::torus(), p, scale);
}

auto NetworkState::quiescent(std::shared_ptr<const WeightMatrix> weights) -> NetworkState {
  const Topology t = weights->topology();
  return NetworkState{t, Field(t.size(), 0.0), std::move(weights)};
}

auto step(const NetworkState& state, std::span<const double> external_input,
          const DynamicsParams& d) -> NetworkState {
  check_input_size(external_input, state.topology);
  NetworkState next = state;
  Field scratch;
  advance(next.rates, external_input, *state.weights, d, scratch);
  return next;
}

auto run(NetworkState state, const InputSchedule& input, const DynamicsParams& d,
         double duration_ms, double sample_every_ms, std::uint64_t seed) -> Trace {
  d.validate();
  if (!(duration_ms > 0.0)) throw ValidationError("duration_ms must be > 0");
  if (!(sample_every_ms >= d.dt_ms)) throw ValidationError("sample_every_ms must be >= dt_ms");
  const long long steps = whole_steps(duration_ms, d.dt_ms, "duration_ms");
  const long long stride = whole_steps(sample_every_ms, d.dt_ms, "sample_every_ms");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, d.noise_std > 0.0 ? d.noise_std : 1.0);

  Trace trace(state.topology, d.dt_ms);
  Field scratch;
  for (long long n = 0;; ++n) {
    const double t = step_time(n, d.dt_ms);
    if (n % stride == 0 || n == steps) trace.record(t, state.rates);
    if (n == steps) break;

    Field in = input(t, state.rates);
    check_input_size(in, state.topology);
    if (d.noise_std > 0.0) {
      for (double& x : in) x += noise(rng);
    }
    advance(state.rates, in, *state.weights, d, scratch);

    for (const double r : state.rates) {
      if (!std::isfinite(r) || r > kDivergenceBound) {
        const double at = step_time(n + 1, d.dt_ms);
        std::ostringstream os;
        os << "rates diverged at t=" << at << " ms (rate " << r << ")";
        throw DivergenceError(os.str(), at);
      }
    }
  }
  return trace;
}

auto init_bump(Topology topology, std::size_t center, double width_nodes, double amplitude)
    -> Field {
  if (!(width_nodes > 0.0)) throw ValidationError("init bump width_nodes must be > 0");
  if (!(amplitude > 0.0)) throw ValidationError("init bump amplitude must be > 0");
  if (center >= topology.size()) throw ValidationError("init bump center outside topology");
  Field f(topology.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double x = topology.distance(k, center) / width_nodes;
    f[k] = amplitude * std::exp(-(x * x));
  }
  return f;
}

}  // namespace harmonic
